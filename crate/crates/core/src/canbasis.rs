//! Canonical spanning sets `eta * G` for binary forms of degree d^n, where eta
//! is a monomial and G a product of the components of the iterate F^(m); the
//! lattice they span, and a lower bound on chi of the canonical metric.
//!
//! Everything is over K = Q, so the coefficient field contributes no height
//! term and the basis needs no powers of a primitive element.
//!
//! Elements are ordered by eta degree, then by the exponent pair of eta, then by
//! the exponent pair (a, b) of `G = F_0^(m)^a F_1^(m)^b`, all ascending.
//! [`extract_basis`] walks its input in order and keeps every element that is
//! independent of the ones kept before, so the basis is reproducible.

use crate::bergman::{bergman_kernel, gram_unchecked, polar_grid, MetricModel};
use crate::dyncore::{HomogeneousMap, ProjPointC};
use crate::error::{Error, Result};
use crate::heights::{green_arch, Heights};
use crate::lattice::IntegralLattice;
use crate::poly::{big_log_abs, UPoly};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;

/// Largest d^n accepted by [`spanning_set`].
pub const MAX_FORM_DEGREE: u64 = 1024;
/// Largest d^n for which the direct chi bracket is computed.
pub const DIRECT_CHI_MAX_DEGREE: u64 = 32;

#[derive(Clone, Debug, PartialEq)]
pub struct SpanningElement {
    /// Exponents (i, j) of `eta = x^i y^j`.
    pub eta: (u32, u32),
    /// Exponents (a, b) of `G = F_0^(m)^a F_1^(m)^b`.
    pub g: (u32, u32),
    pub total_degree: u32,
    /// Coefficient of `x^k y^(D-k)` at index k.
    pub coefficients: Vec<BigInt>,
}

impl SpanningElement {
    pub fn eta_degree(&self) -> u32 {
        self.eta.0 + self.eta.1
    }

    fn sort_key(&self) -> (u32, (u32, u32), (u32, u32)) {
        (self.eta_degree(), self.eta, self.g)
    }
}

fn check_params(map: &HomogeneousMap, n: u32, m: u32) -> Result<u64> {
    if map.dim() != 1 {
        return Err(Error::Unsupported("canonical basis needs N = 1".into()));
    }
    if m == 0 || 2 * m > n {
        return Err(Error::InvalidArgument(format!("need 1 <= m <= n/2, got n = {n}, m = {m}")));
    }
    let d = map.degree() as u64;
    let total = d.checked_pow(n).unwrap_or(u64::MAX);
    if total > MAX_FORM_DEGREE {
        return Err(Error::CapExceeded { requested: total, cap: MAX_FORM_DEGREE });
    }
    Ok(total)
}

/// All `eta * G` of degree d^n with `deg eta <= 2 d^m`, in the documented order.
pub fn spanning_set(map: &HomogeneousMap, n: u32, m: u32) -> Result<Vec<SpanningElement>> {
    let total = check_params(map, n, m)? as u32;
    let fm = map.compose_exact(m)?;
    let dm = fm.degree();
    let (p0, p1) = fm.binary_upolys();
    let kmax = total / dm;
    let kmin = kmax.saturating_sub(2);
    let pow0: Vec<UPoly> = (0..=kmax).map(|a| p0.pow(a)).collect();
    let pow1: Vec<UPoly> = (0..=kmax).map(|b| p1.pow(b)).collect();
    let mut shapes = Vec::new();
    for k in kmin..=kmax {
        let e = total - k * dm;
        for i in 0..=e {
            for a in 0..=k {
                shapes.push(((i, e - i), (a, k - a)));
            }
        }
    }
    let mut elems: Vec<SpanningElement> = shapes
        .par_iter()
        .map(|&(eta, g)| {
            let prod = pow0[g.0 as usize].mul(&pow1[g.1 as usize]).shift(eta.0 as usize);
            SpanningElement {
                eta,
                g,
                total_degree: total,
                coefficients: (0..=total as usize).map(|k| prod.coeff(k)).collect(),
            }
        })
        .collect();
    elems.sort_by_key(|e| e.sort_key());
    if elems.len() < total as usize + 1 {
        return Err(Error::ConstructionFailed(format!(
            "{} spanning elements for a space of dimension {}",
            elems.len(),
            total + 1
        )));
    }
    Ok(elems)
}

/// Evaluate `eta * G` at a lift through the factored form, for checking expansions.
pub fn eval_factored(fm: &HomogeneousMap, e: &SpanningElement, x: Complex64, y: Complex64) -> Complex64 {
    let f = fm.eval_raw(&[x, y]);
    x.powu(e.eta.0) * y.powu(e.eta.1) * f[0].powu(e.g.0) * f[1].powu(e.g.1)
}

pub fn eval_coefficients(c: &[BigInt], x: Complex64, y: Complex64) -> Complex64 {
    let d = c.len() - 1;
    c.iter()
        .enumerate()
        .map(|(k, a)| x.powu(k as u32) * y.powu((d - k) as u32) * crate::poly::big_to_f64(a))
        .sum()
}

/// Greedy exact elimination in input order; the kept rows form the lattice basis.
pub fn extract_basis(elements: &[SpanningElement]) -> Result<IntegralLattice> {
    let dim = elements.first().map_or(0, |e| e.coefficients.len());
    let mut pivots: Vec<(usize, Vec<BigInt>)> = Vec::new();
    let mut chosen = Vec::new();
    for (idx, e) in elements.iter().enumerate() {
        if chosen.len() == dim {
            break;
        }
        let mut v = e.coefficients.clone();
        for (c, row) in &pivots {
            if v[*c].is_zero() {
                continue;
            }
            let g = row[*c].gcd(&v[*c]);
            let (a, b) = (&row[*c] / &g, &v[*c] / &g);
            for (x, r) in v.iter_mut().zip(row) {
                *x = &*x * &a - r * &b;
            }
            let cont = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
            if !cont.is_zero() && !cont.is_one() {
                for x in v.iter_mut() {
                    *x /= &cont;
                }
            }
        }
        if let Some(c) = v.iter().position(|x| !x.is_zero()) {
            pivots.push((c, v));
            chosen.push(idx);
        }
    }
    if chosen.len() < dim {
        return Err(Error::RankDeficient { rank: chosen.len(), needed: dim });
    }
    let basis = chosen.iter().map(|&i| elements[i].coefficients.clone()).collect();
    IntegralLattice::new(basis, chosen)
}

#[derive(Clone, Debug)]
pub struct ElementNorm {
    pub index: usize,
    pub eta: (u32, u32),
    pub g: (u32, u32),
    /// Grid maximum of `log|eta G(x)| - D G_v(x)` at the archimedean place.
    pub log_sup_arch: f64,
    /// `(deg eta + a + b) * lower / (d - 1)`.
    pub budget_arch: f64,
    /// Bound on the sum over bad primes of `log|eta G|_sup,p`.
    pub log_sup_padic: f64,
}

#[derive(Clone, Debug)]
pub struct ChiReport {
    pub n: u32,
    pub m: u32,
    pub dimension: usize,
    pub spanning_size: usize,
    pub lattice: IntegralLattice,
    /// log |det| of the basis: log vol of a fundamental domain of M'_n.
    pub log_covolume: f64,
    /// Bracket for log vol of the archimedean sup unit ball (small D only).
    pub log_vol_sup_ball_bounds: Option<(f64, f64)>,
    /// Direct bracket for `(log vol C - log vol M'_n) / dim` (small D only).
    pub chi_direct: Option<(f64, f64)>,
    pub max_log_sup_arch: f64,
    pub padic_total: f64,
    /// `(max_log_sup_arch + padic_total) / d^(n-m)`; depends on the chosen lift.
    pub c_empirical: f64,
    pub chi_lower: f64,
    /// Global budget `(d^(n-m) + 2 d^m) * lower / (d - 1)`.
    pub budget: f64,
    /// Error radius of the truncated Green's function, times D.
    pub grid_slack: f64,
    pub decomposition: Vec<ElementNorm>,
    pub sup_within_budget: bool,
}

/// Grid sample: (log|x|, log|y|, log|F0^m|, log|F1^m|, G) at max-norm lifts.
fn sample_grid(h: &Heights, m: u32, grid: usize, iterations: u32) -> Result<(Vec<[f64; 5]>, f64)> {
    let map = h.map();
    let radial = (grid / 8).max(8);
    let mut pts = Vec::new();
    for i in 0..=radial {
        let r = i as f64 / radial as f64;
        let count = if i == 0 { 1 } else { grid };
        for k in 0..count {
            let w = Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / grid as f64);
            pts.push(ProjPointC::affine(w));
            if r > 0.0 {
                pts.push(ProjPointC::new(vec![Complex64::new(1.0, 0.0), w])?);
            }
        }
    }
    pts.push(ProjPointC::infinity());
    let mut err = 0.0f64;
    let rows: Vec<([f64; 5], f64)> = pts
        .par_iter()
        .map(|p| {
            let g = green_arch(map, &h.distortion, p, iterations)?;
            let fm = map.iterate(p, m)?;
            Ok((
                [
                    p.coords[0].norm().ln(),
                    p.coords[1].norm().ln(),
                    fm.coords[0].norm().ln() + fm.log_scale,
                    fm.coords[1].norm().ln() + fm.log_scale,
                    g.value,
                ],
                g.error_radius,
            ))
        })
        .collect::<Result<_>>()?;
    let samples = rows
        .into_iter()
        .map(|(r, e)| {
            err = err.max(e);
            r
        })
        .collect();
    Ok((samples, err))
}

fn log_unit_ball_volume(k: usize) -> f64 {
    // log(pi^(k/2) / Gamma(k/2 + 1))
    let half = k as f64 / 2.0;
    let lgamma = if k.is_multiple_of(2) {
        (1..=k / 2).map(|i| (i as f64).ln()).sum::<f64>()
    } else {
        // Gamma(j + 1/2 + 1) = sqrt(pi) * prod_{i=0..=j} (i + 1/2)
        0.5 * std::f64::consts::PI.ln() + (0..=k / 2).map(|i| (i as f64 + 0.5).ln()).sum::<f64>()
    };
    half * std::f64::consts::PI.ln() - lgamma
}

/// Bracket `log vol` of the real sup unit ball of degree-D forms under the
/// canonical metric between the L2 ball and the L2 ball shrunk by
/// `sqrt(max K)` on a grid.
fn sup_ball_bracket(map: &HomogeneousMap, total: u32) -> Result<(f64, f64)> {
    let metric = MetricModel::canonical(map, total)?;
    let order = 4 * total as usize + 64;
    let space = gram_unchecked(&metric, order, 2 * order)?;
    let re = space.gram.map(|c| c.re);
    let chol = nalgebra::Cholesky::new(re).ok_or_else(|| Error::IllConditioned("real Gram not positive definite".into()))?;
    let log_det: f64 = chol.l().diagonal().iter().map(|x| 2.0 * x.ln()).sum();
    let dim = total as usize + 1;
    let l2 = log_unit_ball_volume(dim) - 0.5 * log_det;
    let kmax = bergman_kernel(&space, &polar_grid(128, 256))?.into_iter().fold(0.0, f64::max);
    Ok((l2 - dim as f64 * 0.5 * kmax.ln(), l2))
}

/// Lower bound for chi of the canonical metric on degree-d^n forms with `m <= n/2`.
pub fn chi_lower_bound(map: &HomogeneousMap, n: u32, m: u32, grid: usize) -> Result<ChiReport> {
    let total = check_params(map, n, m)?;
    let heights = Heights::new(map)?;
    let d = map.degree() as f64;
    let dc = &heights.distortion;
    let elems = spanning_set(map, n, m)?;
    let lattice = extract_basis(&elems)?;
    let dim = lattice.dimension;
    let dm = (map.degree() as u64).pow(m);
    // Green's functions accurate to about 1e-12 / D
    let target = 1e-12 / total as f64 * (1.0 - 1.0 / d) / dc.combined.max(1e-300);
    let iterations = ((1.0 / target).ln() / d.ln()).ceil().clamp(1.0, 200.0) as u32;
    let (samples, green_err) = sample_grid(&heights, m, grid.max(8), iterations)?;
    let grid_slack = total as f64 * green_err;
    let g_bound = dc.lower.max(0.0) / (d - 1.0);
    let padic_unit: f64 = heights
        .bad
        .iter()
        .map(|b| b.max_drop as f64 * crate::poly::big_to_f64(&BigInt::from(b.p.clone())).ln() / (d - 1.0))
        .sum();
    let decomposition: Vec<ElementNorm> = lattice
        .chosen
        .par_iter()
        .map(|&idx| {
            let e = &elems[idx];
            let (i, j) = (e.eta.0 as f64, e.eta.1 as f64);
            let (a, b) = (e.g.0 as f64, e.g.1 as f64);
            let t = total as f64;
            let sup = samples
                .iter()
                .map(|s| {
                    let term = |c: f64, l: f64| if c == 0.0 { 0.0 } else { c * l };
                    term(i, s[0]) + term(j, s[1]) + term(a, s[2]) + term(b, s[3]) - t * s[4]
                })
                .fold(f64::NEG_INFINITY, f64::max);
            let weight = (e.eta_degree() + e.g.0 + e.g.1) as f64;
            ElementNorm {
                index: idx,
                eta: e.eta,
                g: e.g,
                log_sup_arch: sup,
                budget_arch: weight * g_bound,
                log_sup_padic: weight * padic_unit,
            }
        })
        .collect();
    let max_log_sup_arch = decomposition.iter().map(|e| e.log_sup_arch).fold(f64::NEG_INFINITY, f64::max) + grid_slack;
    let padic_total = decomposition.iter().map(|e| e.log_sup_padic).fold(0.0, f64::max);
    let sup_within_budget = decomposition.iter().all(|e| e.log_sup_arch <= e.budget_arch + grid_slack + 1e-9);
    let chi_lower = -(max_log_sup_arch + padic_total + (dim as f64).ln());
    let log_covolume = big_log_abs(&lattice.determinant);
    let (log_vol_sup_ball_bounds, chi_direct) = if total <= DIRECT_CHI_MAX_DEGREE {
        let (lo, hi) = sup_ball_bracket(map, total as u32)?;
        let k = dim as f64;
        (Some((lo, hi)), Some(((lo - log_covolume) / k, (hi - log_covolume) / k)))
    } else {
        (None, None)
    };
    let dnm = (map.degree() as f64).powi((n - m) as i32);
    Ok(ChiReport {
        n,
        m,
        dimension: dim,
        spanning_size: elems.len(),
        log_covolume,
        log_vol_sup_ball_bounds,
        chi_direct,
        max_log_sup_arch,
        padic_total,
        c_empirical: (max_log_sup_arch + padic_total) / dnm,
        chi_lower,
        budget: (dnm + 2.0 * dm as f64) * g_bound,
        grid_slack,
        decomposition,
        sup_within_budget,
        lattice,
    })
}
