//! Hermitian geometry of O(n) on P^1: Gram matrices of the monomial basis,
//! Bergman kernels, sup/L2 comparison, volume differences, and a Minkowski
//! small-section search.
//!
//! Conventions. Sections of O(n) are coefficient vectors `c_j` of
//! `x^j y^(n-j)`. The reference measure is the Fubini-Study area form of mass 1,
//! written as `du dtheta / 2pi` with `u = |x|^2 / (|x|^2 + |y|^2)`. Pointwise
//! squared norms are `|s(x~)|^2 * w(x)` at the unit Euclidean lift `x~`, where
//! the weight `w` is 1 for Fubini-Study, `exp(-k * eps * f)` for a perturbation
//! (with `k = 1` or `k = n`, see [`ExponentConvention`]), and `exp(-2 n G(x~))`
//! for the canonical metric of a map with Green's function G.

use crate::dyncore::{HomogeneousMap, ProjPointC};
use crate::error::{Error, Result};
use crate::heights::{distortion_constant, green_arch, DistortionConstant};
use crate::lattice::{lll_reduce, IntegralLattice};
use crate::quadrature::gauss_legendre_unit;
use crate::seeds::stream_rng;
use crate::stats::{fit_line, pairwise_sum};
use crate::testfn::SmoothTestFn;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_bigint::BigInt;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::f64::consts::TAU;

/// Relative movement of a Gram entry under order doubling that counts as converged.
pub const GRAM_TOLERANCE: f64 = 1e-9;
/// Generalized eigenvalues at or below this are rejected.
pub const EIGEN_FLOOR: f64 = 1e-13;

/// How the perturbation scale enters the weight on O(n).
///
/// `Unit` multiplies the squared pointwise norm by `exp(-eps f)` for every n;
/// `TensorPower` uses `exp(-n eps f)`, i.e. the n-th power of a perturbed metric
/// on O(1).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ExponentConvention {
    #[default]
    Unit,
    TensorPower,
}

impl ExponentConvention {
    pub fn factor(self, n: u32) -> f64 {
        match self {
            ExponentConvention::Unit => 1.0,
            ExponentConvention::TensorPower => n as f64,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Weight {
    FubiniStudy,
    Perturbed { f: SmoothTestFn, eps: f64, convention: ExponentConvention },
    Canonical { map: HomogeneousMap, distortion: DistortionConstant, iterations: u32 },
}

#[derive(Clone, Debug)]
pub struct MetricModel {
    pub n: u32,
    pub weight: Weight,
}

impl MetricModel {
    pub fn fubini_study(n: u32) -> Self {
        MetricModel { n, weight: Weight::FubiniStudy }
    }

    pub fn perturbed(n: u32, f: SmoothTestFn, eps: f64) -> Self {
        Self::perturbed_with(n, f, eps, ExponentConvention::Unit)
    }

    pub fn perturbed_with(n: u32, f: SmoothTestFn, eps: f64, convention: ExponentConvention) -> Self {
        MetricModel { n, weight: Weight::Perturbed { f, eps, convention } }
    }

    /// Canonical metric of a binary lift, Green's function truncated to error below 1e-13.
    pub fn canonical(map: &HomogeneousMap, n: u32) -> Result<Self> {
        if map.dim() != 1 {
            return Err(Error::Unsupported("canonical metric needs N = 1".into()));
        }
        let distortion = distortion_constant(map)?;
        let d = map.degree() as f64;
        let target = 1e-13 * (1.0 - 1.0 / d) / distortion.combined.max(1e-300);
        let iterations = ((1.0 / target).ln() / d.ln()).ceil().clamp(1.0, 200.0) as u32;
        Ok(MetricModel { n, weight: Weight::Canonical { map: map.clone(), distortion, iterations } })
    }

    /// Scale k in `exp(-k eps f)`, zero for unperturbed weights.
    pub fn exponent(&self) -> f64 {
        match &self.weight {
            Weight::Perturbed { convention, .. } => convention.factor(self.n),
            _ => 0.0,
        }
    }

    /// `log w` at the unit Euclidean lift `(x, y)`.
    pub fn log_weight(&self, x: Complex64, y: Complex64) -> Result<f64> {
        match &self.weight {
            Weight::FubiniStudy => Ok(0.0),
            Weight::Perturbed { f, eps, convention } => {
                let p = ProjPointC::new(vec![x, y])?;
                Ok(-convention.factor(self.n) * eps * f.eval(&p))
            }
            Weight::Canonical { map, distortion, iterations } => {
                let m = x.norm().max(y.norm());
                let p = ProjPointC::new(vec![x, y])?;
                let g = green_arch(map, distortion, &p, *iterations)?;
                Ok(-2.0 * self.n as f64 * (g.value + m.ln()))
            }
        }
    }
}

/// Unit Euclidean lift of a projective point.
pub fn unit_lift(p: &ProjPointC) -> (Complex64, Complex64) {
    let (x, y) = (p.coords[0], p.coords[1]);
    let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
    (x / r, y / r)
}

fn monomials(n: u32, x: Complex64, y: Complex64) -> DVector<Complex64> {
    let n = n as usize;
    let mut v = DVector::from_element(n + 1, Complex64::new(0.0, 0.0));
    let mut xp = vec![Complex64::new(1.0, 0.0); n + 1];
    let mut yp = vec![Complex64::new(1.0, 0.0); n + 1];
    for k in 1..=n {
        xp[k] = xp[k - 1] * x;
        yp[k] = yp[k - 1] * y;
    }
    for j in 0..=n {
        v[j] = xp[j] * yp[n - j];
    }
    v
}

/// Closed-form Fubini-Study Gram diagonal `j! (n-j)! / (n+1)!`.
pub fn fs_gram_diagonal(n: u32) -> Vec<f64> {
    // 1 / ((n+1) * C(n, j)) computed in logs
    let n = n as usize;
    let lf = |k: usize| (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
    (0..=n).map(|j| (lf(j) + lf(n - j) - lf(n + 1)).exp()).collect()
}

#[derive(Clone, Debug)]
pub struct SectionSpace {
    pub n: u32,
    pub metric: MetricModel,
    pub gram: DMatrix<Complex64>,
    /// Total mass of the reference measure (always 1 here).
    pub mass: f64,
    /// Gauss-Legendre order and angular node count of the accepted Gram.
    pub quadrature: (usize, usize),
    /// Max relative change seen when doubling the order.
    pub refinement_change: f64,
    /// For Fubini-Study: max relative deviation from the closed form.
    pub closed_form_error: Option<f64>,
    chol: Cholesky<Complex64, Dyn>,
}

/// Quadrature nodes `(x, y, weight)` on the sphere for a product rule of given orders.
fn nodes(order: usize, angular: usize) -> Vec<(Complex64, Complex64, f64)> {
    let (us, ws) = gauss_legendre_unit(order);
    let mut out = Vec::with_capacity(order * angular);
    for (u, w) in us.iter().zip(&ws) {
        for k in 0..angular {
            let th = TAU * k as f64 / angular as f64;
            out.push((Complex64::from_polar(u.sqrt(), th), Complex64::new((1.0 - u).sqrt(), 0.0), w / angular as f64));
        }
    }
    out
}

fn assemble(metric: &MetricModel, order: usize, angular: usize) -> Result<DMatrix<Complex64>> {
    let n = metric.n as usize;
    let (us, ws) = gauss_legendre_unit(order);
    let per_node: Vec<DMatrix<Complex64>> = us
        .par_iter()
        .zip(&ws)
        .map(|(&u, &gw)| {
            let (a, b) = (u.sqrt(), (1.0 - u).sqrt());
            // angular Fourier coefficients of the weight
            let mut wts = Vec::with_capacity(angular);
            for k in 0..angular {
                let th = TAU * k as f64 / angular as f64;
                wts.push(metric.log_weight(Complex64::from_polar(a, th), Complex64::new(b, 0.0))?.exp());
            }
            let four: Vec<Complex64> = (0..=n)
                .map(|m| {
                    let terms: Vec<Complex64> = wts
                        .iter()
                        .enumerate()
                        .map(|(k, w)| Complex64::from_polar(*w, TAU * (m * k % angular) as f64 / angular as f64))
                        .collect();
                    let re: Vec<f64> = terms.iter().map(|c| c.re).collect();
                    let im: Vec<f64> = terms.iter().map(|c| c.im).collect();
                    Complex64::new(pairwise_sum(&re), pairwise_sum(&im)) / angular as f64
                })
                .collect();
            let ap: Vec<f64> = (0..=2 * n).map(|k| a.powi(k as i32)).collect();
            let bp: Vec<f64> = (0..=2 * n).map(|k| b.powi(k as i32)).collect();
            let mut g = DMatrix::from_element(n + 1, n + 1, Complex64::new(0.0, 0.0));
            for j in 0..=n {
                for k in 0..=n {
                    let radial = gw * ap[j + k] * bp[2 * n - j - k];
                    let f = if j >= k { four[j - k] } else { four[k - j].conj() };
                    g[(j, k)] = f * radial;
                }
            }
            Ok(g)
        })
        .collect::<Result<_>>()?;
    let mut g = DMatrix::from_element(n + 1, n + 1, Complex64::new(0.0, 0.0));
    for m in per_node {
        g += m;
    }
    // exact Hermitian symmetrization of rounding noise
    let gh = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(gh)
}

fn relative_change(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for k in 0..n {
            let scale = (b[(j, j)].re * b[(k, k)].re).sqrt();
            worst = worst.max((a[(j, k)] - b[(j, k)]).norm() / scale);
        }
    }
    worst
}

/// Gram matrix of the monomial basis at the given Gauss-Legendre order, checked
/// against the doubled order.
pub fn gram(metric: &MetricModel, quadrature_order: usize) -> Result<SectionSpace> {
    let n = metric.n as usize;
    if quadrature_order < n + 2 {
        return Err(Error::InvalidArgument(format!("quadrature order {quadrature_order} < n + 2 = {}", n + 2)));
    }
    let angular = (2 * quadrature_order).max(2 * n + 4);
    let coarse = assemble(metric, quadrature_order, angular)?;
    let fine = assemble(metric, 2 * quadrature_order, 2 * angular)?;
    let change = relative_change(&coarse, &fine);
    if !(change <= GRAM_TOLERANCE) {
        return Err(Error::QuadratureUnconverged { max_change: change });
    }
    finish(metric, fine, (2 * quadrature_order, 2 * angular), change)
}

/// Gram at a fixed product rule without the refinement check, for weights that
/// are only Lipschitz (canonical metrics). `refinement_change` is NaN.
pub fn gram_unchecked(metric: &MetricModel, order: usize, angular: usize) -> Result<SectionSpace> {
    let g = assemble(metric, order, angular.max(2 * metric.n as usize + 2))?;
    finish(metric, g, (order, angular), f64::NAN)
}

/// Gram with the order doubled from `n + 2` (at least 16) until converged, up to 4096.
pub fn gram_auto(metric: &MetricModel) -> Result<SectionSpace> {
    let mut q = (metric.n as usize + 2).max(16);
    loop {
        match gram(metric, q) {
            Err(Error::QuadratureUnconverged { .. }) if q < 2048 => q *= 2,
            r => return r,
        }
    }
}

fn finish(metric: &MetricModel, gram: DMatrix<Complex64>, quad: (usize, usize), change: f64) -> Result<SectionSpace> {
    let closed_form_error = matches!(metric.weight, Weight::FubiniStudy).then(|| {
        let diag = fs_gram_diagonal(metric.n);
        let mut worst: f64 = 0.0;
        for j in 0..gram.nrows() {
            for k in 0..gram.nrows() {
                let want = if j == k { diag[j] } else { 0.0 };
                worst = worst.max((gram[(j, k)] - want).norm() / (diag[j] * diag[k]).sqrt());
            }
        }
        worst
    });
    let chol = Cholesky::new(gram.clone())
        .ok_or_else(|| Error::IllConditioned("Gram matrix is not positive definite".into()))?;
    Ok(SectionSpace {
        n: metric.n,
        metric: metric.clone(),
        gram,
        mass: 1.0,
        quadrature: quad,
        refinement_change: change,
        closed_form_error,
        chol,
    })
}

impl SectionSpace {
    pub fn dim(&self) -> usize {
        self.n as usize + 1
    }

    /// Squared L2 norm `c* G c`.
    pub fn l2_norm_sqr(&self, c: &DVector<Complex64>) -> f64 {
        (c.adjoint() * &self.gram * c)[(0, 0)].re
    }

    /// Bergman kernel `w(x) * v(x)* G^-1 v(x)` at a point.
    pub fn kernel_at(&self, p: &ProjPointC) -> Result<f64> {
        let (x, y) = unit_lift(p);
        let v = monomials(self.n, x, y);
        let z = self
            .chol
            .l()
            .solve_lower_triangular(&v)
            .ok_or_else(|| Error::IllConditioned("triangular solve failed".into()))?;
        Ok(z.norm_squared() * self.metric.log_weight(x, y)?.exp())
    }

    /// Pointwise norm `|s(x)|` of the section with coefficients c.
    pub fn pointwise_norm(&self, c: &DVector<Complex64>, p: &ProjPointC) -> Result<f64> {
        let (x, y) = unit_lift(p);
        let v = monomials(self.n, x, y);
        let s: Complex64 = c.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        Ok(s.norm() * (0.5 * self.metric.log_weight(x, y)?).exp())
    }
}

/// Fibonacci grid of `count` points, equidistributed for the Fubini-Study measure.
pub fn sphere_grid(count: usize) -> Vec<ProjPointC> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let u = (i as f64 + 0.5) / count as f64;
            let x = Complex64::from_polar(u.sqrt(), golden * i as f64);
            ProjPointC::new(vec![x, Complex64::new((1.0 - u).sqrt(), 0.0)]).expect("nonzero")
        })
        .collect()
}

/// Polar grid with both poles: `radial + 1` levels of u, `angular` angles per interior level.
pub fn polar_grid(radial: usize, angular: usize) -> Vec<ProjPointC> {
    let mut out = Vec::new();
    for i in 0..=radial {
        let u = i as f64 / radial as f64;
        let count = if i == 0 || i == radial { 1 } else { angular };
        for k in 0..count {
            let x = Complex64::from_polar(u.sqrt(), TAU * k as f64 / angular as f64);
            out.push(ProjPointC::new(vec![x, Complex64::new((1.0 - u).sqrt(), 0.0)]).expect("nonzero"));
        }
    }
    out
}

pub fn bergman_kernel(space: &SectionSpace, points: &[ProjPointC]) -> Result<Vec<f64>> {
    points.par_iter().map(|p| space.kernel_at(p)).collect()
}

/// `integral K dmu` by a product rule independent of the one used for the Gram.
pub fn kernel_integral(space: &SectionSpace) -> Result<f64> {
    let (q, m) = space.quadrature;
    let vals: Vec<f64> = nodes(q + 7, m + 6)
        .par_iter()
        .map(|&(x, y, w)| {
            let p = ProjPointC::new(vec![x, y])?;
            Ok(w * space.kernel_at(&p)?)
        })
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&vals))
}

#[derive(Clone, Debug)]
pub struct KernelStats {
    pub min: f64,
    pub max: f64,
    pub ratio: f64,
    /// `max |K / (n+1) - 1|`.
    pub deviation: f64,
}

pub fn kernel_stats(space: &SectionSpace, points: &[ProjPointC]) -> Result<KernelStats> {
    let k = bergman_kernel(space, points)?;
    let min = k.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = k.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let dim = space.dim() as f64;
    Ok(KernelStats { min, max, ratio: max / min, deviation: (max / dim - 1.0).abs().max((min / dim - 1.0).abs()) })
}

#[derive(Clone, Debug)]
pub struct GromovEstimate {
    pub n: u32,
    /// Max of `sup|s| / ||s||_L2` over the candidates.
    pub ratio: f64,
    /// Best ratio among the monomials alone.
    pub monomial_ratio: f64,
    /// `sqrt(max K)` on the grid, the Cauchy-Schwarz envelope.
    pub kernel_bound: f64,
    pub candidates: usize,
}

/// Sup/L2 ratios over the monomial basis plus `trials` Gaussian sections.
pub fn gromov_constant(space: &SectionSpace, trials: usize, seed: u64) -> Result<GromovEstimate> {
    let grid = polar_grid(64, 128);
    gromov_constant_on(space, trials, seed, &grid)
}

pub fn gromov_constant_on(space: &SectionSpace, trials: usize, seed: u64, grid: &[ProjPointC]) -> Result<GromovEstimate> {
    let dim = space.dim();
    // rows: sqrt(w) * v(x)^T
    let rows: Vec<Vec<Complex64>> = grid
        .par_iter()
        .map(|p| {
            let (x, y) = unit_lift(p);
            let s = (0.5 * space.metric.log_weight(x, y)?).exp();
            Ok(monomials(space.n, x, y).iter().map(|c| c * s).collect())
        })
        .collect::<Result<_>>()?;
    let eval = DMatrix::from_fn(grid.len(), dim, |i, j| rows[i][j]);
    let mut cands: Vec<DVector<Complex64>> = (0..dim)
        .map(|j| DVector::from_fn(dim, |i, _| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)))
        .collect();
    for t in 0..trials {
        let mut rng = stream_rng(seed, t as u64);
        cands.push(DVector::from_fn(dim, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        }));
    }
    let ratios: Vec<f64> = cands
        .par_iter()
        .map(|c| {
            let vals = &eval * c;
            let sup = vals.iter().map(|z| z.norm()).fold(0.0, f64::max);
            sup / space.l2_norm_sqr(c).sqrt()
        })
        .collect();
    let kmax = bergman_kernel(space, grid)?.into_iter().fold(0.0, f64::max);
    Ok(GromovEstimate {
        n: space.n,
        ratio: ratios.iter().cloned().fold(0.0, f64::max),
        monomial_ratio: ratios[..dim].iter().cloned().fold(0.0, f64::max),
        kernel_bound: kmax.sqrt(),
        candidates: ratios.len(),
    })
}

/// Closed-form sup/L2 ratio of the Fubini-Study monomial `x^j y^(n-j)`.
pub fn fs_monomial_ratio(n: u32, j: u32) -> f64 {
    let (nf, jf) = (n as f64, j as f64);
    let t = |a: f64| if a == 0.0 { 0.0 } else { a * (a / nf).ln() };
    let log_sup = 0.5 * (t(jf) + t(nf - jf));
    (log_sup - 0.5 * fs_gram_diagonal(n)[j as usize].ln()).exp()
}

#[derive(Clone, Debug)]
pub struct GromovFit {
    pub estimates: Vec<GromovEstimate>,
    pub exponent: f64,
    pub r_squared: f64,
}

/// Fit `log ratio` against `log n` over metrics built by `metric(n)`.
pub fn gromov_exponent(
    ns: &[u32],
    trials: usize,
    seed: u64,
    metric: impl Fn(u32) -> MetricModel,
) -> Result<GromovFit> {
    if trials < 100 {
        return Err(Error::InvalidArgument("gromov_constant needs at least 100 trials".into()));
    }
    let estimates: Vec<GromovEstimate> = ns
        .iter()
        .map(|&n| gromov_constant(&gram_auto(&metric(n))?, trials, seed))
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = estimates.iter().map(|e| e.ratio.ln()).collect();
    let fit = fit_line(&xs, &ys);
    Ok(GromovFit { estimates, exponent: fit.slope, r_squared: fit.r_squared })
}

#[derive(Clone, Debug)]
pub struct VolumeDiff {
    /// `sum (1/2) log lambda_i` over generalized eigenvalues of gram1 against gram0:
    /// `log vol(unit ball of metric0) - log vol(unit ball of metric1)` per real
    /// dimension pair.
    pub value: f64,
    pub per_eigenvalue: Vec<f64>,
}

pub fn volume_diff_spaces(s0: &SectionSpace, s1: &SectionSpace) -> Result<VolumeDiff> {
    if s0.n != s1.n {
        return Err(Error::InvalidArgument("volume_diff needs equal n".into()));
    }
    let l = s0.chol.l();
    let y = l
        .solve_lower_triangular(&s1.gram)
        .ok_or_else(|| Error::IllConditioned("triangular solve failed".into()))?;
    let a = l
        .solve_lower_triangular(&y.adjoint())
        .ok_or_else(|| Error::IllConditioned("triangular solve failed".into()))?;
    let a = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let mut eig: Vec<f64> = a.symmetric_eigenvalues().iter().cloned().collect();
    eig.sort_by(f64::total_cmp);
    if let Some(bad) = eig.iter().find(|&&e| !(e > EIGEN_FLOOR)) {
        return Err(Error::IllConditioned(format!("generalized eigenvalue {bad:e}")));
    }
    let per: Vec<f64> = eig.iter().map(|e| 0.5 * e.ln()).collect();
    Ok(VolumeDiff { value: pairwise_sum(&per), per_eigenvalue: per })
}

pub fn volume_diff(metric0: &MetricModel, metric1: &MetricModel) -> Result<VolumeDiff> {
    if metric0.n != metric1.n {
        return Err(Error::InvalidArgument("volume_diff needs equal n".into()));
    }
    volume_diff_spaces(&gram_auto(metric0)?, &gram_auto(metric1)?)
}

#[derive(Clone, Debug)]
pub struct Linearization {
    pub n: u32,
    pub eps: [f64; 3],
    pub values: [f64; 3],
    /// Richardson estimate of the linear coefficient A in `value = A eps + B eps^2 + ...`.
    pub richardson: f64,
    /// `-(k/2) * integral f K_FS dmu` with `K_FS = n + 1`.
    pub predicted: f64,
    pub relative_error: f64,
}

/// Volume differences at `eps, eps/2, eps/4` and the extrapolated slope at 0.
pub fn linearize(f: &SmoothTestFn, n: u32, eps: f64, convention: ExponentConvention) -> Result<Linearization> {
    let fs = gram_auto(&MetricModel::fubini_study(n))?;
    let es = [eps, eps / 2.0, eps / 4.0];
    let mut values = [0.0; 3];
    for (v, &e) in values.iter_mut().zip(&es) {
        let s1 = gram_auto(&MetricModel::perturbed_with(n, f.clone(), e, convention))?;
        *v = volume_diff_spaces(&fs, &s1)?.value;
    }
    let r: Vec<f64> = values.iter().zip(&es).map(|(v, e)| v / e).collect();
    let richardson = (r[0] - 6.0 * r[1] + 8.0 * r[2]) / 3.0;
    let (q, m) = fs.quadrature;
    let fint: Vec<f64> = nodes(q, m)
        .par_iter()
        .map(|&(x, y, w)| Ok(w * f.eval(&ProjPointC::new(vec![x, y])?)))
        .collect::<Result<_>>()?;
    let predicted = -0.5 * convention.factor(n) * (n as f64 + 1.0) * pairwise_sum(&fint);
    Ok(Linearization {
        n,
        eps: es,
        values,
        richardson,
        predicted,
        relative_error: (richardson - predicted).abs() / predicted.abs(),
    })
}

#[derive(Clone, Debug)]
pub struct MinkowskiOutcome {
    pub section: Option<Vec<BigInt>>,
    pub norm: Option<f64>,
    /// True when `chi > dim + log 2`, so Minkowski guarantees a section of norm <= 1.
    pub guaranteed: bool,
    pub chi: f64,
    /// Largest coefficient bound enumerated over the reduced basis.
    pub bound_reached: i64,
    pub enumerated: usize,
}

/// Enumeration budget for the Minkowski search.
pub const MINKOWSKI_BUDGET: usize = 2_000_000;

/// Search an LLL-reduced basis for a nonzero lattice vector of norm at most 1,
/// shell by shell in the max-norm of the integer coefficients.
pub fn minkowski_small_section(
    lattice: &IntegralLattice,
    norm: &(dyn Fn(&[BigInt]) -> f64 + Sync),
    chi: f64,
) -> MinkowskiOutcome {
    let dim = lattice.dimension;
    let guaranteed = chi > dim as f64 + 2f64.ln();
    let reduced = lll_reduce(&lattice.basis);
    let mut enumerated = 0usize;
    let mut bound = 0i64;
    loop {
        let next = bound + 1;
        let shell = (2 * next + 1) as f64;
        let inner = (2 * bound + 1) as f64;
        let size = shell.powi(dim as i32) - inner.powi(dim as i32);
        if enumerated as f64 + size / 2.0 > MINKOWSKI_BUDGET as f64 {
            break;
        }
        bound = next;
        let mut best: Option<(f64, Vec<BigInt>)> = None;
        let mut coeffs = vec![-bound; dim];
        loop {
            let maxabs = coeffs.iter().map(|c| c.abs()).max().unwrap_or(0);
            let first = coeffs.iter().find(|&&c| c != 0).copied().unwrap_or(0);
            if maxabs == bound && first > 0 {
                enumerated += 1;
                let v = crate::lattice::combine(&reduced, &coeffs);
                let nv = norm(&v);
                if nv <= 1.0 && best.as_ref().is_none_or(|(b, _)| nv < *b) {
                    best = Some((nv, v));
                }
            }
            // odometer
            let mut i = 0;
            while i < dim {
                if coeffs[i] < bound {
                    coeffs[i] += 1;
                    break;
                }
                coeffs[i] = -bound;
                i += 1;
            }
            if i == dim {
                break;
            }
        }
        if let Some((nv, v)) = best {
            return MinkowskiOutcome { section: Some(v), norm: Some(nv), guaranteed, chi, bound_reached: bound, enumerated };
        }
    }
    MinkowskiOutcome { section: None, norm: None, guaranteed, chi, bound_reached: bound, enumerated }
}
