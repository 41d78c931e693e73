//! The equilibrium measure of a rational map of P^1 by backward iteration, and
//! closed forms for monomial maps.
//!
//! A walk starts at a non-exceptional base point and repeatedly replaces z by a
//! uniformly chosen root of the fiber form `b F_0(x, y) - a F_1(x, y)` over
//! `z = [a : b]`. Walks of fixed length run on derived seeds, so a cloud is a
//! pure function of `(map, seed, burn_in, base point, n)` and independent of
//! the thread count.

use crate::dyncore::{HomogeneousMap, PointCloud, ProjPointC};
use crate::error::{Error, Result};
use crate::roots::{AberthConfig, ComplexPoly};
use crate::seeds::stream_rng;
use crate::stats::{fit_line, mean_and_std_error};
use crate::testfn::{chart_coord, SmoothTestFn};
use num_bigint::BigUint;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

pub const DEFAULT_BURN_IN: usize = 50;
pub const DEFAULT_WALK_LEN: usize = 4096;
/// Relative coefficient error allowed when rebuilding a fiber form from its roots.
pub const FIBER_TOLERANCE: f64 = 1e-8;

/// Monte Carlo estimate of an integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// Empirical local-moderation exponent: `mu(box of side s) <= c_hat s^kappa_hat`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularityEstimate {
    pub kappa_hat: f64,
    pub box_levels: usize,
    pub c_hat: f64,
    pub r_squared: f64,
    /// Chart whose square `[-2, 2]^2` was boxed.
    pub chart: usize,
}

/// Result of a sampling run.
#[derive(Clone, Debug)]
pub struct SampleReport {
    pub cloud: PointCloud,
    /// Fiber solves that failed certification and were retried.
    pub retries: u64,
}

#[derive(Clone, Debug)]
pub struct EquilibriumSampler {
    map: HomogeneousMap,
    pub seed: u64,
    pub burn_in: usize,
    pub base_point: ProjPointC,
    pub walk_len: usize,
}

fn c0() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// All d preimages of p (with multiplicity) as unit-normalized points.
pub fn preimages(map: &HomogeneousMap, p: &ProjPointC, attempt: u32) -> Result<Vec<ProjPointC>> {
    if map.dim() != 1 {
        return Err(Error::Unsupported("backward iteration needs N = 1".into()));
    }
    let (f0, f1) = map.binary_f64();
    let (a, b) = (p.coords[0], p.coords[1]);
    let d = map.degree() as usize;
    // g_j: coefficient of x^j y^(d-j)
    let g: Vec<Complex64> = (0..=d).map(|j| b * f0[j] - a * f1[j]).collect();
    let use_z = g[d].norm() >= g[0].norm();
    // chart z = x/y has coefficients g (low to high); chart w = y/x has them reversed
    let mut coeffs: Vec<Complex64> = if use_z { g.clone() } else { g.iter().rev().copied().collect() };
    let mut at_far = 0;
    while coeffs.last().is_some_and(|c| *c == c0()) {
        coeffs.pop();
        at_far += 1;
    }
    if coeffs.is_empty() {
        return Err(Error::DegenerateImage);
    }
    // exact zeros at either end are roots at the chart's origin or its far point
    let mut at_origin = 0;
    while coeffs.len() > 1 && coeffs[0] == c0() {
        coeffs.remove(0);
        at_origin += 1;
    }
    let (origin, far) = if use_z {
        (ProjPointC::new(vec![c0(), Complex64::new(1.0, 0.0)])?, ProjPointC::infinity())
    } else {
        (ProjPointC::infinity(), ProjPointC::new(vec![c0(), Complex64::new(1.0, 0.0)])?)
    };
    let mut out = vec![far; at_far];
    out.extend(std::iter::repeat_n(origin, at_origin));
    if coeffs.len() > 1 {
        let poly = ComplexPoly::new(coeffs);
        let res = poly.roots(AberthConfig::default(), 0.4 + 0.7 * attempt as f64);
        let err = poly.reconstruction_error(&res.roots);
        if !(err <= FIBER_TOLERANCE) {
            return Err(Error::RootFindFailure { uncertified: res.roots });
        }
        for r in res.roots {
            let one = Complex64::new(1.0, 0.0);
            let coords = if use_z { vec![r, one] } else { vec![one, r] };
            out.push(ProjPointC::new(coords)?);
        }
    }
    Ok(out)
}

fn preimages_retrying(map: &HomogeneousMap, p: &ProjPointC, retries: &AtomicU64) -> Result<Vec<ProjPointC>> {
    let mut last = None;
    for attempt in 0..6 {
        match preimages(map, p, attempt) {
            Ok(v) => return Ok(v),
            Err(e) => {
                retries.fetch_add(1, Ordering::Relaxed);
                last = Some(e);
            }
        }
    }
    Err(last.unwrap())
}

fn distinct_count(points: &[ProjPointC]) -> usize {
    let mut reps: Vec<&ProjPointC> = Vec::new();
    for p in points {
        if reps.iter().all(|q| q.chordal_distance(p) > 1e-9) {
            reps.push(p);
        }
    }
    reps.len()
}

impl EquilibriumSampler {
    /// Sampler with default burn-in, walk length and an automatically chosen base point.
    pub fn new(map: &HomogeneousMap, seed: u64) -> Result<Self> {
        if map.dim() != 1 {
            return Err(Error::Unsupported("equilibrium sampling is implemented for N = 1".into()));
        }
        let candidates = [
            Complex64::new(0.61, 0.37),
            Complex64::new(-0.43, 0.71),
            Complex64::new(1.3, -0.2),
            Complex64::new(0.05, -1.7),
        ];
        for z in candidates {
            let p = ProjPointC::affine(z);
            if Self::check_base(map, &p).is_ok() {
                return Ok(EquilibriumSampler {
                    map: map.clone(),
                    seed,
                    burn_in: DEFAULT_BURN_IN,
                    base_point: p,
                    walk_len: DEFAULT_WALK_LEN,
                });
            }
        }
        Err(Error::InvalidArgument("no non-exceptional base point among the candidates".into()))
    }

    /// Depth-3 backward orbit must have d^3 points with multiplicity and more
    /// than two distinct points (the exceptional set has at most two).
    fn check_base(map: &HomogeneousMap, p: &ProjPointC) -> Result<()> {
        let retries = AtomicU64::new(0);
        let mut level = vec![p.clone()];
        for _ in 0..3 {
            let mut next = Vec::new();
            for q in &level {
                next.extend(preimages_retrying(map, q, &retries)?);
            }
            level = next;
        }
        let d = map.degree() as usize;
        if level.len() != d * d * d || distinct_count(&level) <= 2 {
            return Err(Error::InvalidArgument("base point is exceptional".into()));
        }
        Ok(())
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_walk_len(mut self, walk_len: usize) -> Self {
        self.walk_len = walk_len.max(1);
        self
    }

    pub fn with_base_point(mut self, p: ProjPointC) -> Result<Self> {
        Self::check_base(&self.map, &p)?;
        self.base_point = p;
        Ok(self)
    }

    pub fn map(&self) -> &HomogeneousMap {
        &self.map
    }

    fn walk(&self, index: u64, len: usize, retries: &AtomicU64) -> Result<Vec<ProjPointC>> {
        let mut rng = stream_rng(self.seed, index);
        let mut z = self.base_point.unit_lift();
        let mut out = Vec::with_capacity(len);
        let mut step = 0usize;
        let mut restarts = 0;
        while out.len() < len {
            match preimages_retrying(&self.map, &z, retries) {
                Ok(pre) => {
                    z = pre[rng.random_range(0..pre.len())].clone();
                    step += 1;
                    if step > self.burn_in {
                        out.push(z.clone());
                    }
                }
                Err(e) => {
                    // restart the walk from the base point with a fresh branch history
                    restarts += 1;
                    if restarts > 8 {
                        return Err(e);
                    }
                    z = self.base_point.unit_lift();
                    step = 0;
                }
            }
        }
        Ok(out)
    }

    /// n points of the backward orbit after burn-in.
    pub fn sample(&self, n: usize) -> Result<PointCloud> {
        Ok(self.sample_with_report(n)?.cloud)
    }

    pub fn sample_with_report(&self, n: usize) -> Result<SampleReport> {
        if n == 0 {
            return Err(Error::InvalidArgument("sample size must be at least 1".into()));
        }
        let walks = n.div_ceil(self.walk_len);
        let retries = AtomicU64::new(0);
        let parts: Vec<Result<Vec<ProjPointC>>> = (0..walks)
            .into_par_iter()
            .map(|w| {
                let len = self.walk_len.min(n - w * self.walk_len);
                self.walk(w as u64, len, &retries)
            })
            .collect();
        let mut points = Vec::with_capacity(n);
        for p in parts {
            points.extend(p?);
        }
        let mut cloud = PointCloud::new(points);
        cloud.label = format!("equilibrium sample seed={} n={n}", self.seed);
        Ok(SampleReport { cloud, retries: retries.into_inner() })
    }
}

/// Monte Carlo integral of f against the equilibrium measure.
pub fn integrate(f: &SmoothTestFn, sampler: &EquilibriumSampler, n: usize) -> Result<MeasureEstimate> {
    if n < 100 {
        return Err(Error::InvalidArgument("integrate needs n >= 100".into()));
    }
    let cloud = sampler.sample(n)?;
    Ok(estimate_over(f, &cloud))
}

/// Mean and standard error of f over a cloud.
pub fn estimate_over(f: &SmoothTestFn, cloud: &PointCloud) -> MeasureEstimate {
    let vals: Vec<f64> = cloud.points.iter().map(|p| f.eval(p)).collect();
    let (value, std_error) = mean_and_std_error(&vals);
    MeasureEstimate { value, std_error, n_samples: vals.len() }
}

/// Empirical pullback check `|E[f] - E[(1/d) sum_{F(w) = z} f(w)]|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvarianceDefect {
    pub defect: f64,
    /// Standard error of the paired difference.
    pub std_error: f64,
}

pub fn invariance_defect(f: &SmoothTestFn, sampler: &EquilibriumSampler, n: usize) -> Result<InvarianceDefect> {
    if n < 100 {
        return Err(Error::InvalidArgument("invariance_defect needs n >= 100".into()));
    }
    let cloud = sampler.sample(n)?;
    let retries = AtomicU64::new(0);
    let diffs: Vec<f64> = cloud
        .points
        .par_iter()
        .map(|z| {
            let pre = preimages_retrying(sampler.map(), z, &retries)?;
            let avg = pre.iter().map(|w| f.eval(w)).sum::<f64>() / pre.len() as f64;
            Ok(f.eval(z) - avg)
        })
        .collect::<Result<_>>()?;
    let (mean, se) = mean_and_std_error(&diffs);
    Ok(InvarianceDefect { defect: mean.abs(), std_error: se })
}

/// Fit `log max box mass ~ kappa log side` over dyadic levels of the square
/// `[-2, 2]^2` in the chart holding the sample.
pub fn estimate_kappa(sampler: &EquilibriumSampler, n: usize, levels: usize) -> Result<RegularityEstimate> {
    if levels < 4 {
        return Err(Error::InvalidArgument(format!("estimate_kappa needs at least 4 levels, got {levels}")));
    }
    if n < 10_000 {
        return Err(Error::InvalidArgument("estimate_kappa needs n >= 10^4".into()));
    }
    let cloud = sampler.sample(n)?;
    kappa_from_cloud(&cloud, levels)
}

/// Chart 0 if at least 99% of the cloud lies in its square `[-2, 2]^2`, else chart 1.
pub fn support_chart(cloud: &PointCloud) -> (usize, Vec<Complex64>) {
    let inside = |chart: usize| -> Vec<Complex64> {
        cloud
            .points
            .iter()
            .filter_map(|p| chart_coord(p, chart))
            .filter(|w| w.re.abs() < 2.0 && w.im.abs() < 2.0)
            .collect()
    };
    let pts0 = inside(0);
    if pts0.len() as f64 >= 0.99 * cloud.len() as f64 {
        (0, pts0)
    } else {
        (1, inside(1))
    }
}

/// Box counts at level `level` (side `4 / 2^level`), keyed by integer box index.
pub fn box_counts(points: &[Complex64], level: usize) -> HashMap<(i64, i64), usize> {
    let side = 4.0 / (1u64 << level) as f64;
    let mut counts = HashMap::new();
    for w in points {
        let i = ((w.re + 2.0) / side).floor() as i64;
        let j = ((w.im + 2.0) / side).floor() as i64;
        *counts.entry((i, j)).or_insert(0) += 1;
    }
    counts
}

pub const FIRST_KAPPA_LEVEL: usize = 3;

fn kappa_from_cloud(cloud: &PointCloud, levels: usize) -> Result<RegularityEstimate> {
    let (chart, pts) = support_chart(cloud);
    let total = cloud.len() as f64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for level in FIRST_KAPPA_LEVEL..FIRST_KAPPA_LEVEL + levels {
        let side = 4.0 / (1u64 << level) as f64;
        let m = box_counts(&pts, level).values().copied().max().unwrap_or(0);
        if m == 0 {
            return Err(Error::InsufficientData("empty boxes at every position".into()));
        }
        xs.push(side.ln());
        ys.push((m as f64 / total).ln());
    }
    let fit = fit_line(&xs, &ys);
    Ok(RegularityEstimate {
        kappa_hat: fit.slope.clamp(f64::MIN_POSITIVE, 2.0),
        box_levels: levels,
        c_hat: fit.intercept.exp(),
        r_squared: fit.r_squared,
        chart,
    })
}

/// Uniform measure on the unit circle, the equilibrium measure of `(x^d, y^d)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct CircleMeasure;

impl CircleMeasure {
    /// Trapezoid rule in the angle, doubled until two passes agree to 1e-13;
    /// spectrally accurate for smooth f. `std_error` holds the last change.
    pub fn integrate(&self, f: &SmoothTestFn) -> MeasureEstimate {
        let mut m = 64usize;
        let mut prev = Self::trapezoid(f, m);
        loop {
            m *= 2;
            let cur = Self::trapezoid(f, m);
            let change = (cur - prev).abs();
            if change <= 1e-13 || m >= 1 << 20 {
                return MeasureEstimate { value: cur, std_error: change, n_samples: m };
            }
            prev = cur;
        }
    }

    fn trapezoid(f: &SmoothTestFn, m: usize) -> f64 {
        let vals: Vec<f64> = (0..m)
            .map(|k| f.eval_z(Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / m as f64)))
            .collect();
        crate::stats::pairwise_sum(&vals) / m as f64
    }
}

/// Exact measure for `(x^d, y^d)` maps, `None` otherwise.
pub fn closed_form_measure(map: &HomogeneousMap) -> Option<CircleMeasure> {
    (map.dim() == 1 && map.is_unit_monomial()).then_some(CircleMeasure)
}

/// Number of fixed points of `(x^D, y^D, z^D)` on P^2 with `D = d^n`: `D^2 + D + 1`.
pub fn torus_periodic_count(d: u32, n: u32) -> BigUint {
    let big_d = BigUint::from(d).pow(n);
    &big_d * &big_d + &big_d + 1u32
}

/// Measured `alpha = |Per_n| / d^(2n)` for the monomial map of P^2.
pub fn torus_alpha(d: u32, n: u32) -> f64 {
    let count = torus_periodic_count(d, n);
    let dn = (d as f64).powi(n as i32);
    crate::poly::big_to_f64(&num_bigint::BigInt::from(count)) / (dn * dn)
}

/// Integral over the unit torus `|x| = |y| = |z|` of P^2, parametrized by the
/// angles of `x/z` and `y/z`, by the tensor trapezoid rule with m points per angle.
pub fn torus_integrate(f: impl Fn(f64, f64) -> f64 + Sync, m: usize) -> f64 {
    let tau = std::f64::consts::TAU;
    let rows: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| {
            let a = tau * i as f64 / m as f64;
            let vals: Vec<f64> = (0..m).map(|j| f(a, tau * j as f64 / m as f64)).collect();
            crate::stats::pairwise_sum(&vals)
        })
        .collect();
    crate::stats::pairwise_sum(&rows) / (m * m) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq() -> HomogeneousMap {
        HomogeneousMap::binary(&[1, 0, 0], &[0, 0, 1]).unwrap()
    }

    fn cheb() -> HomogeneousMap {
        HomogeneousMap::binary(&[2, 0, -1], &[0, 0, 1]).unwrap()
    }

    fn localized_re() -> SmoothTestFn {
        SmoothTestFn::annulus(0, [0.25, 0.5, 1.5, 1.9], 1, vec![(1, 1.0, 0.0)]).unwrap()
    }

    fn localized_re_sq() -> SmoothTestFn {
        SmoothTestFn::annulus(0, [0.25, 0.5, 1.5, 1.9], 2, vec![(0, 0.5, 0.0), (2, 0.5, 0.0)]).unwrap()
    }

    #[test]
    fn circle_samples() {
        let s = EquilibriumSampler::new(&sq(), 1).unwrap().with_burn_in(30);
        let cloud = s.sample(5000).unwrap();
        assert_eq!(cloud.len(), 5000);
        for p in &cloud.points {
            let z = p.z().unwrap();
            assert!((z.norm() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn chebyshev_samples_on_interval() {
        let s = EquilibriumSampler::new(&cheb(), 2).unwrap();
        for p in s.sample(5000).unwrap().points {
            let z = p.z().unwrap();
            assert!(z.im.abs() < 1e-6 && z.re.abs() <= 1.0 + 1e-6, "{z}");
        }
    }

    #[test]
    fn single_sample_is_a_preimage_of_the_base() {
        let f = HomogeneousMap::binary(&[1, 0, -1], &[0, 0, 1]).unwrap();
        let s = EquilibriumSampler::new(&f, 3).unwrap().with_burn_in(0);
        let cloud = s.sample(1).unwrap();
        let image = f.evaluate(&cloud.points[0]).unwrap();
        assert!(image.chordal_distance(&s.base_point) < 1e-12);
    }

    #[test]
    fn determinism_and_thread_independence() {
        let s = EquilibriumSampler::new(&cheb(), 9).unwrap().with_walk_len(100);
        let a = s.sample(1000).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| s.sample(1000).unwrap());
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn exceptional_base_rejected() {
        let s = EquilibriumSampler::new(&sq(), 1).unwrap();
        assert!(s.with_base_point(ProjPointC::affine(Complex64::new(0.0, 0.0))).is_err());
    }

    #[test]
    fn integrals_on_the_circle() {
        let s = EquilibriumSampler::new(&sq(), 5).unwrap();
        let c = integrate(&SmoothTestFn::constant(2.5), &s, 1000).unwrap();
        assert_eq!((c.value, c.std_error), (2.5, 0.0));
        let e = integrate(&localized_re(), &s, 20_000).unwrap();
        assert!(e.value.abs() <= 3.0 * e.std_error, "{e:?}");
        let e = integrate(&localized_re_sq(), &s, 20_000).unwrap();
        assert!((e.value - 0.5).abs() <= 3.0 * e.std_error, "{e:?}");
        let exact = CircleMeasure.integrate(&localized_re_sq());
        assert!((exact.value - 0.5).abs() < 1e-12);
        assert!(integrate(&localized_re(), &s, 10).is_err());
    }

    #[test]
    fn invariance() {
        let s = EquilibriumSampler::new(&sq(), 6).unwrap();
        let d = invariance_defect(&SmoothTestFn::constant(1.0), &s, 500).unwrap();
        assert_eq!(d.defect, 0.0);
        let f = SmoothTestFn::bump(0, Complex64::new(0.7, 0.7), 0.1, 0.3).unwrap();
        let d = invariance_defect(&f, &s, 20_000).unwrap();
        assert!(d.defect <= 4.0 * d.std_error, "{d:?}");
        // negative control: no burn-in, base far from the Julia set
        let far = s
            .clone()
            .with_burn_in(0)
            .with_walk_len(1)
            .with_base_point(ProjPointC::affine(Complex64::new(1.5, 0.0)))
            .unwrap();
        let g = SmoothTestFn::bump(0, Complex64::new(1.2, 0.0), 0.1, 0.2).unwrap();
        let d = invariance_defect(&g, &far, 2000).unwrap();
        assert!(d.defect > 10.0 * d.std_error.max(1e-3), "{d:?}");
    }

    #[test]
    fn kappa_estimates() {
        let s = EquilibriumSampler::new(&sq(), 8).unwrap();
        let k = estimate_kappa(&s, 100_000, 6).unwrap();
        assert!((k.kappa_hat - 1.0).abs() <= 0.15, "{k:?}");
        let s = EquilibriumSampler::new(&cheb(), 8).unwrap();
        let k = estimate_kappa(&s, 100_000, 6).unwrap();
        assert!((0.4..=1.1).contains(&k.kappa_hat), "{k:?}");
        assert!(matches!(estimate_kappa(&s, 100_000, 1), Err(Error::InvalidArgument(_))));
    }

    /// Kolmogorov-Smirnov statistic of angles against uniform.
    fn ks_uniform(mut u: Vec<f64>) -> f64 {
        u.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = u.len() as f64;
        u.iter()
            .enumerate()
            .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
            .fold(0.0, f64::max)
    }

    #[test]
    fn circle_law_ks() {
        for d in [2usize, 3, 5] {
            let mut f0 = vec![0i64; d + 1];
            let mut f1 = vec![0i64; d + 1];
            f0[0] = 1;
            f1[d] = 1;
            let map = HomogeneousMap::binary(&f0, &f1).unwrap();
            let s = EquilibriumSampler::new(&map, 13).unwrap();
            let u: Vec<f64> = s
                .sample(10_000)
                .unwrap()
                .points
                .iter()
                .map(|p| {
                    let z = p.z().unwrap();
                    (z.arg() / std::f64::consts::TAU).rem_euclid(1.0)
                })
                .collect();
            let stat = ks_uniform(u) * 100.0;
            assert!(stat < 1.628, "d = {d}: KS {stat}");
        }
    }

    #[test]
    fn torus_counts() {
        assert_eq!(torus_periodic_count(2, 1), BigUint::from(7u32));
        assert_eq!(torus_periodic_count(2, 3), BigUint::from(73u32));
        assert!((torus_alpha(2, 10) - 1.0).abs() < 1e-3);
        let v = torus_integrate(|a, b| (a + 2.0 * b).cos() + 1.0, 32);
        assert!((v - 1.0).abs() < 1e-14);
    }
}
