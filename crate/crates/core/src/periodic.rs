//! Periodic points on P^1, Galois degree statistics of the period-n polynomial,
//! and periodic lines of homogeneous maps of the affine plane.
//!
//! `Per_n` means `Fix(phi^n)`. The fixed-point form of `F^(n) = (P, Q)` is
//! `P(x, y) y - Q(x, y) x`, of degree `d^n + 1`. Roots are found by Aberth
//! iteration whose Newton ratio comes from iterating the lift with its
//! derivative, never from expanded coefficients, which are far too large to
//! evaluate in binary64 once `d^n` reaches a few hundred.

use crate::dyncore::{HomogeneousMap, HomogeneousPoly, PointCloud, ProjPointC};
use crate::error::{Error, Result};
use crate::factor::{factor_degrees_mod_p, factor_squarefree, random_good_primes, Factorization, SUBSET_CAP};
use crate::poly::{big_log_abs, UPoly};
use crate::roots::{aberth, initial_circle, AberthConfig, ComplexPoly};
use crate::seeds::stream_rng;
use num_bigint::BigUint;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;

/// Residual threshold for returned roots, relative to the form's coefficient size.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Max chordal distance between a returned point and its image under phi^n.
pub const FIXED_POINT_TOLERANCE: f64 = 1e-8;

/// Fix(phi^n) without multiplicity.
#[derive(Clone, Debug)]
pub struct PeriodicSet {
    pub period: u32,
    /// Distinct points; finite ones first (sorted by real then imaginary part), then infinity.
    pub points: PointCloud,
    /// Dehomogenized fixed-point form `P(z, 1) - z Q(z, 1)` with declared degree `d^n + 1`.
    pub defining_form: (UPoly, usize),
    /// Primitive squarefree part of the dehomogenized form.
    pub squarefree: UPoly,
    pub includes_infinity: bool,
    /// True when the form itself has no repeated roots (then `|points| = d^n + 1`).
    pub multiplicity_free: bool,
}

impl PeriodicSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Fixed-point form of `F^(n)` as a dehomogenized polynomial (declared degree `d^n + 1`).
pub fn fixed_point_form(iterate: &HomogeneousMap) -> (UPoly, usize) {
    let (p, q) = iterate.binary_upolys();
    let big_d = iterate.degree() as usize;
    (p.sub(&q.shift(1)), big_d + 1)
}

/// Newton ratio `H / H'` of the fixed-point form of `F^n` at z, with `log |H(z)|`,
/// evaluated by iterating F and its derivative with a running log scale.
fn fixed_form_ratio(map: &HomogeneousMap, n: u32, z: Complex64) -> (Complex64, f64) {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let far = z.norm() > 1.0;
    let w = if far { 1.0 / z } else { z };
    let (mut v, mut dv) = if far { ([one, w], [zero, one]) } else { ([w, one], [one, zero]) };
    let mut log_scale = 0.0f64;
    let d = map.degree() as f64;
    for _ in 0..n {
        let (y, jac) = map.eval_with_jacobian(&v);
        let dy = [
            jac[0][0] * dv[0] + jac[0][1] * dv[1],
            jac[1][0] * dv[0] + jac[1][1] * dv[1],
        ];
        let m = y[0].norm().max(y[1].norm());
        if !(m > 0.0 && m.is_finite()) {
            return (Complex64::new(f64::NAN, f64::NAN), f64::NAN);
        }
        v = [y[0] / m, y[1] / m];
        dv = [dy[0] / m, dy[1] / m];
        log_scale = d * log_scale + m.ln();
    }
    if far {
        let total = d.powi(n as i32) + 1.0;
        let k = v[0] * w - v[1];
        let dk = dv[0] * w + v[0] - dv[1];
        let ratio = z * k / (total * k - w * dk);
        (ratio, total * z.norm().ln() + log_scale + k.norm().ln())
    } else {
        let h = v[0] - z * v[1];
        let dh = dv[0] - v[1] - z * dv[1];
        (h / dh, log_scale + h.norm().ln())
    }
}

/// Sort key for deterministic point order.
fn cmp_points(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Per_n of a map of P^1.
pub fn per_n(map: &HomogeneousMap, n: u32) -> Result<PeriodicSet> {
    if map.dim() != 1 {
        return Err(Error::Unsupported("periodic points are enumerated on P^1 only".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("period must be at least 1".into()));
    }
    let it = map.compose_exact(n)?;
    let (form, total) = fixed_point_form(&it);
    if form.is_zero() {
        return Err(Error::DegenerateMap("phi^n is the identity".into()));
    }
    let includes_infinity = form.deg() < total;
    let squarefree = form.squarefree_part();
    let multiplicity_free = squarefree.deg() == form.deg() && total - form.deg() <= 1;
    let k = squarefree.deg();
    let mut roots = Vec::new();
    if k > 0 {
        // G = gcd(H, H') removes repeated roots: (H/G)'/(H/G) = H'/H - G'/G.
        let g = form.gcd(&form.derivative());
        let g_poly = (g.deg() > 0).then(|| {
            ComplexPoly::new(g.to_f64().into_iter().map(|c| Complex64::new(c, 0.0)).collect())
        });
        let ratio = |z: Complex64| -> Complex64 {
            let (r, _) = fixed_form_ratio(map, n, z);
            match &g_poly {
                Some(gp) => 1.0 / (1.0 / r - 1.0 / gp.ratio(z)),
                None => r,
            }
        };
        let log_lc = big_log_abs(&squarefree.lc());
        let low = squarefree.coeffs().iter().find(|c| !c.is_zero()).unwrap();
        let radius = ((big_log_abs(low) - log_lc) / k as f64).exp().clamp(1e-3, 1e3);
        let mut best: Option<(Vec<Complex64>, Vec<Complex64>)> = None;
        for attempt in 0..3 {
            let init = initial_circle(k, radius * (1.0 + 0.1 * attempt as f64), 0.3 + 0.5 * attempt as f64);
            let res = aberth(ratio, init, AberthConfig { max_iter: 4000, tol: 1e-14 });
            let bad = uncertified(map, n, &form, &res.roots, &ratio);
            if bad.is_empty() {
                best = Some((res.roots, Vec::new()));
                break;
            }
            if best.as_ref().is_none_or(|b| bad.len() < b.1.len()) {
                best = Some((res.roots, bad));
            }
        }
        let (r, bad) = best.unwrap();
        if !bad.is_empty() {
            return Err(Error::RootFindFailure { uncertified: bad });
        }
        roots = r;
    }
    roots.sort_by(cmp_points);
    let mut points: Vec<ProjPointC> = roots.into_iter().map(ProjPointC::affine).collect();
    if includes_infinity {
        points.push(ProjPointC::infinity());
    }
    let mut cloud = PointCloud::new(points);
    cloud.defining_form = Some((form.clone(), total));
    cloud.label = format!("Per_{n}");
    Ok(PeriodicSet {
        period: n,
        points: cloud,
        defining_form: (form, total),
        squarefree,
        includes_infinity,
        multiplicity_free,
    })
}

/// Roots failing any certificate: Newton step, fixed-point distance, or the
/// coefficient-relative residual (in the log domain).
fn uncertified<F: Fn(Complex64) -> Complex64>(
    map: &HomogeneousMap,
    n: u32,
    form: &UPoly,
    roots: &[Complex64],
    ratio: &F,
) -> Vec<Complex64> {
    let log_norm = form.log_height();
    let total = form.deg() as f64;
    roots
        .iter()
        .copied()
        .filter(|&z| {
            if !z.is_finite() {
                return true;
            }
            let step = ratio(z).norm();
            let p = ProjPointC::affine(z);
            let fixed = map.iterate(&p, n).map(|q| q.chordal_distance(&p)).unwrap_or(f64::INFINITY);
            let (_, log_h) = fixed_form_ratio(map, n, z);
            let rel = log_h - log_norm - total * z.norm().max(1.0).ln();
            !(step <= 1e-8 * z.norm().max(1.0) && fixed <= FIXED_POINT_TOLERANCE)
                || rel > RESIDUAL_TOLERANCE.ln()
        })
        .collect()
}

/// Points of `set` whose exact period is `set.period` (no smaller period divides it).
pub fn exact_period(map: &HomogeneousMap, set: &PeriodicSet) -> Result<PointCloud> {
    let n = set.period;
    let divisors: Vec<u32> = (1..n).filter(|m| n.is_multiple_of(*m)).collect();
    let mut keep = Vec::new();
    for p in &set.points.points {
        let mut exact = true;
        for &m in &divisors {
            if map.iterate(p, m)?.chordal_distance(p) <= 1e-7 {
                exact = false;
                break;
            }
        }
        if exact {
            keep.push(p.clone());
        }
    }
    let mut cloud = PointCloud::new(keep);
    cloud.label = format!("exact period {n}");
    Ok(cloud)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DegreeMode {
    Certified,
    Fast,
}

/// Irreducible-factor degrees of the squarefree affine period-n polynomial
/// (the point at infinity, when periodic, is rational and not included).
#[derive(Clone, Debug)]
pub struct FactorDegreeProfile {
    pub period: u32,
    /// (degree, multiplicity), ascending by degree.
    pub degree_multiset: Vec<(usize, usize)>,
    /// True for an exact factorization over Z; false for mod-p information.
    pub certified: bool,
    /// Exact irreducible factors (certified mode).
    pub factors: Option<Vec<UPoly>>,
    /// Mod-p factor degrees for each prime used (fast mode).
    pub mod_p_profiles: Vec<(u64, Vec<usize>)>,
    /// Degree of the squarefree affine polynomial.
    pub total_degree: usize,
}

impl FactorDegreeProfile {
    /// Largest degree in the profile: exact in certified mode, a lower bound for
    /// the largest true factor degree in fast mode.
    pub fn max_degree(&self) -> usize {
        self.degree_multiset.iter().map(|x| x.0).max().unwrap_or(0)
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.degree_multiset.iter().flat_map(|&(d, m)| std::iter::repeat_n(d, m)).collect()
    }
}

fn multiset(mut degs: Vec<usize>) -> Vec<(usize, usize)> {
    degs.sort_unstable();
    let mut out: Vec<(usize, usize)> = Vec::new();
    for d in degs {
        match out.last_mut() {
            Some((x, m)) if *x == d => *m += 1,
            _ => out.push((d, 1)),
        }
    }
    out
}

/// Number of random good primes used by the fast mode.
pub const FAST_MODE_PRIMES: usize = 5;

fn fast_profile(n: u32, sq: &UPoly) -> FactorDegreeProfile {
    let primes = random_good_primes(sq, FAST_MODE_PRIMES, 0x9e71_0d1c ^ n as u64);
    let profiles: Vec<(u64, Vec<usize>)> = primes.iter().map(|&p| (p, factor_degrees_mod_p(sq, p))).collect();
    // Every mod-p profile refines the true one; the coarsest carries the most information.
    let coarsest = profiles
        .iter()
        .min_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.1.iter().max().cmp(&a.1.iter().max())))
        .map(|x| x.1.clone())
        .unwrap_or_default();
    FactorDegreeProfile {
        period: n,
        degree_multiset: multiset(coarsest),
        certified: false,
        factors: None,
        mod_p_profiles: profiles,
        total_degree: sq.deg(),
    }
}

pub fn galois_degrees(map: &HomogeneousMap, n: u32, mode: DegreeMode) -> Result<FactorDegreeProfile> {
    let set = per_n_form(map, n)?;
    let sq = set.squarefree_part();
    if sq.deg() == 0 {
        return Ok(FactorDegreeProfile {
            period: n,
            degree_multiset: Vec::new(),
            certified: true,
            factors: Some(Vec::new()),
            mod_p_profiles: Vec::new(),
            total_degree: 0,
        });
    }
    match mode {
        DegreeMode::Fast => Ok(fast_profile(n, &sq)),
        DegreeMode::Certified => match factor_squarefree(&sq, SUBSET_CAP) {
            Ok(Factorization { factors, .. }) => Ok(FactorDegreeProfile {
                period: n,
                degree_multiset: multiset(factors.iter().map(|f| f.deg()).collect()),
                certified: true,
                factors: Some(factors),
                mod_p_profiles: Vec::new(),
                total_degree: sq.deg(),
            }),
            Err(Error::CapExceeded { .. }) => Ok(fast_profile(n, &sq)),
            Err(e) => Err(e),
        },
    }
}

/// The dehomogenized fixed-point form of phi^n (no root finding).
pub fn per_n_form(map: &HomogeneousMap, n: u32) -> Result<UPoly> {
    if map.dim() != 1 {
        return Err(Error::Unsupported("periodic points are enumerated on P^1 only".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("period must be at least 1".into()));
    }
    Ok(fixed_point_form(&map.compose_exact(n)?).0)
}

/// Index of the factor vanishing at z: smallest coefficient-relative residual.
pub fn assign_factor(z: Complex64, factors: &[UPoly]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, f) in factors.iter().enumerate() {
        let coeffs = f.to_f64();
        let (val, scale) = if z.norm() <= 1.0 {
            let v = coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
            let s: f64 = coeffs.iter().map(|c| c.abs()).sum();
            (v, s)
        } else {
            let w = 1.0 / z;
            let v = coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * w + c);
            let s: f64 = coeffs.iter().map(|c| c.abs()).sum();
            (v, s)
        };
        let r = val.norm() / scale;
        if r < best.0 {
            best = (r, i);
        }
    }
    best.1
}

/// Minimal-polynomial degree of every point of `set` (1 for infinity).
pub fn min_poly_degrees(set: &PeriodicSet, factors: &[UPoly]) -> Vec<usize> {
    set.points
        .points
        .iter()
        .map(|p| match p.z() {
            None => 1,
            Some(z) => factors[assign_factor(z, factors)].deg(),
        })
        .collect()
}

/// Galois orbits of Per_n: one cloud per irreducible factor (and one for infinity).
pub fn galois_orbits(map: &HomogeneousMap, n: u32) -> Result<Vec<PointCloud>> {
    let set = per_n(map, n)?;
    let fac = factor_squarefree(&set.squarefree, SUBSET_CAP)?.factors;
    let mut groups: Vec<Vec<ProjPointC>> = vec![Vec::new(); fac.len()];
    let mut infinity = None;
    for p in &set.points.points {
        match p.z() {
            None => infinity = Some(p.clone()),
            Some(z) => groups[assign_factor(z, &fac)].push(p.clone()),
        }
    }
    let mut out: Vec<PointCloud> = groups
        .into_iter()
        .zip(&fac)
        .map(|(pts, f)| {
            let mut c = PointCloud::new(pts);
            c.defining_form = Some((f.clone(), f.deg()));
            c.label = format!("Per_{n} orbit of degree {}", f.deg());
            c
        })
        .collect();
    if let Some(p) = infinity {
        let mut c = PointCloud::new(vec![p]);
        c.label = format!("Per_{n} infinity");
        out.push(c);
    }
    Ok(out)
}

/// `3 e^2 d^n`, the uniform bound on period-n points on a degree-e curve.
pub fn curve_count_bound(e: u64, d: u64, n: u32) -> BigUint {
    BigUint::from(3u32) * BigUint::from(e).pow(2) * BigUint::from(d).pow(n)
}

/// Root-of-unity check of `c_n z^(d^n - 1)` at one candidate periodic point.
#[derive(Clone, Debug)]
pub struct RootOfUnityCheck {
    pub z: Complex64,
    pub value: Complex64,
    pub on_unit_circle: bool,
    /// Smallest m <= 64 with `value^m = 1` to 1e-8, if any.
    pub order: Option<u32>,
}

/// One invariant line `H_lambda` with lambda periodic for the quotient map.
#[derive(Clone, Debug)]
pub struct LineData {
    /// lambda as a point of P^1 (infinity is the line y = 0).
    pub lambda: ProjPointC,
    /// Exact lambda = num/den when rational.
    pub lambda_exact: Option<BigRational>,
    pub lambda_is_infinity: bool,
    /// Residual `chordal(phi~^n(lambda), lambda)`.
    pub residual: f64,
    /// `c_n = g_n(lambda, 1)` (or `f_n(1, 0)` on the line y = 0).
    pub c_n: Complex64,
    pub c_n_exact: Option<BigRational>,
    pub root_checks: Vec<RootOfUnityCheck>,
    /// Max relative error between direct iteration of phi^n on random points of
    /// the line and the model `t -> c_n t^(d^n)`.
    pub direct_check_error: f64,
}

#[derive(Clone, Debug)]
pub struct PeriodicLineReport {
    pub period: u32,
    pub degree: u32,
    pub lines: Vec<LineData>,
}

fn big_rational_to_f64(r: &BigRational) -> f64 {
    let ln = big_log_abs(r.numer()) - big_log_abs(r.denom());
    if r.is_zero() {
        0.0
    } else {
        let s = if r.is_negative() { -1.0 } else { 1.0 };
        s * ln.exp()
    }
}

/// Periodic lines through the origin for `phi(x, y) = (f(x, y), g(x, y))` on A^2.
pub fn p2_periodic_lines(f: &HomogeneousPoly, g: &HomogeneousPoly, n: u32) -> Result<PeriodicLineReport> {
    if f.num_vars() != 2 || g.num_vars() != 2 || f.degree() != g.degree() {
        return Err(Error::InvalidArgument("f and g must be binary forms of equal degree".into()));
    }
    let map = HomogeneousMap::new(vec![f.clone(), g.clone()])?;
    let d = map.degree();
    let set = per_n(&map, n)?;
    let it = map.compose_exact(n)?;
    let big_d = it.degree() as usize;
    let (fn_poly, gn_poly) = it.binary_upolys();
    let rational: Vec<BigRational> = factor_squarefree(&set.squarefree, SUBSET_CAP)
        .map(|fac| {
            fac.factors
                .iter()
                .filter(|p| p.deg() == 1)
                .map(|p| BigRational::new(-p.coeff(0), p.coeff(1)))
                .collect()
        })
        .unwrap_or_default();
    let mut lines = Vec::new();
    for (idx, p) in set.points.points.iter().enumerate() {
        let is_inf = p.is_infinity();
        let exact = if is_inf {
            None
        } else {
            let z = p.z().unwrap();
            rational
                .iter()
                .find(|r| (big_rational_to_f64(r) - z.re).abs() <= 1e-8 * z.norm().max(1.0) && z.im.abs() <= 1e-8)
                .cloned()
        };
        let residual = map.iterate(p, n)?.chordal_distance(p);
        // line coordinate t: points (lambda t, t), or (t, 0) on the line at infinity
        let base = if is_inf {
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
        } else {
            [p.z().unwrap(), Complex64::new(1.0, 0.0)]
        };
        let raw_n = iterate_raw(&map, &base, n);
        let c_n = if is_inf { raw_n[0] } else { raw_n[1] };
        let c_n_exact = if is_inf {
            Some(BigRational::from_integer(fn_poly.coeff(big_d)))
        } else {
            exact.as_ref().map(|r| {
                let (a, b) = (r.numer().clone(), r.denom().clone());
                BigRational::new(gn_poly.eval_form_big(big_d, &a, &b), b.pow(big_d as u32))
            })
        };
        let mut root_checks = Vec::new();
        if exact.is_some() || is_inf {
            let m = big_d - 1;
            if m >= 1 && c_n.norm() > 0.0 {
                let radius = c_n.norm().powf(-1.0 / m as f64);
                for k in 0..m.min(16) {
                    let angle = (std::f64::consts::TAU * k as f64 - c_n.arg()) / m as f64;
                    let z = Complex64::from_polar(radius, angle);
                    let value = c_n * z.powu(m as u32);
                    let on_unit_circle = (value.norm() - 1.0).abs() <= 1e-8;
                    let order = (1..=64u32).find(|&o| (value.powu(o) - 1.0).norm() <= 1e-8);
                    root_checks.push(RootOfUnityCheck { z, value, on_unit_circle, order });
                }
            }
        }
        let mut rng = stream_rng(0x11e5 ^ n as u64, idx as u64);
        let mut err: f64 = 0.0;
        for _ in 0..10 {
            let t = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let start = [base[0] * t, base[1] * t];
            let direct = iterate_raw(&map, &start, n);
            let model = c_n * t.powu(big_d as u32);
            let got = if is_inf { direct[0] } else { direct[1] };
            let scale = model.norm().max(1e-300);
            err = err.max((got - model).norm() / scale);
            // the iterate must stay on the line
            let off = if is_inf { direct[1].norm() } else { (direct[0] - base[0] * direct[1]).norm() };
            err = err.max(off / scale);
        }
        lines.push(LineData {
            lambda: p.clone(),
            lambda_exact: exact,
            lambda_is_infinity: is_inf,
            residual,
            c_n,
            c_n_exact,
            root_checks,
            direct_check_error: err,
        });
    }
    Ok(PeriodicLineReport { period: n, degree: d, lines })
}

/// Unnormalized iterate `F^n(v)` in binary64.
fn iterate_raw(map: &HomogeneousMap, v: &[Complex64; 2], n: u32) -> [Complex64; 2] {
    let mut cur = v.to_vec();
    for _ in 0..n {
        cur = map.eval_raw(&cur);
    }
    [cur[0], cur[1]]
}

/// Exact rational c_n as f64 (for display).
pub fn rational_to_f64(r: &BigRational) -> f64 {
    big_rational_to_f64(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn sq() -> HomogeneousMap {
        HomogeneousMap::binary(&[1, 0, 0], &[0, 0, 1]).unwrap()
    }

    fn poly(c: &[i64]) -> HomogeneousMap {
        HomogeneousMap::polynomial(c).unwrap()
    }

    #[test]
    fn z_squared_period_three() {
        let s = per_n(&sq(), 3).unwrap();
        assert_eq!(s.len(), 9);
        assert!(s.includes_infinity && s.multiplicity_free);
        let finite: Vec<Complex64> = s.points.points.iter().filter_map(|p| p.z()).collect();
        assert!(finite.iter().any(|z| z.norm() < 1e-12));
        let on_circle = finite.iter().filter(|z| (z.norm() - 1.0).abs() < 1e-8).count();
        assert_eq!(on_circle, 7);
        for z in finite.iter().filter(|z| z.norm() > 0.5) {
            assert!((z.powu(7) - 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn z_squared_minus_one_period_two() {
        let f = poly(&[-1, 0, 1]);
        let s = per_n(&f, 2).unwrap();
        assert_eq!(s.len(), 5);
        // oracle: z(z+1)(z^2-z-1) = z^4 - 2z^2 - z
        assert_eq!(s.squarefree, UPoly::from_i64(&[0, -1, -2, 0, 1]));
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let expected = [-1.0, 1.0 - phi, 0.0, phi];
        let finite: Vec<Complex64> = s.points.points.iter().filter_map(|p| p.z()).collect();
        for (z, e) in finite.iter().zip(expected) {
            assert!((z - e).norm() < 1e-12, "{z} vs {e}");
        }
        assert!(s.points.points[4].is_infinity());
        let prof = galois_degrees(&f, 2, DegreeMode::Certified).unwrap();
        assert_eq!(prof.degrees(), vec![1, 1, 2]);
        let degs = min_poly_degrees(&s, prof.factors.as_ref().unwrap());
        assert_eq!(degs, vec![1, 2, 1, 2, 1]);
    }

    #[test]
    fn z_squared_plus_one() {
        let f = poly(&[1, 0, 1]);
        let s = per_n(&f, 1).unwrap();
        assert_eq!(s.len(), 3);
        for z in s.points.points.iter().filter_map(|p| p.z()) {
            assert!((z * z - z + 1.0).norm() < 1e-12);
        }
        let prof = galois_degrees(&f, 2, DegreeMode::Certified).unwrap();
        assert_eq!(prof.degrees(), vec![2, 2]);
        assert_eq!(
            prof.factors.unwrap(),
            vec![UPoly::from_i64(&[1, -1, 1]), UPoly::from_i64(&[2, 1, 1])]
        );
    }

    #[test]
    fn z_squared_profile_period_two() {
        let prof = galois_degrees(&sq(), 2, DegreeMode::Certified).unwrap();
        assert_eq!(prof.degrees(), vec![1, 1, 2]);
    }

    #[test]
    fn repeated_roots_are_handled() {
        // z^2 + 1/4 has a parabolic fixed point at 1/2: lift (4x^2 + y^2, 4y^2)
        let f = HomogeneousMap::binary(&[4, 0, 1], &[0, 0, 4]).unwrap();
        let s = per_n(&f, 1).unwrap();
        assert!(!s.multiplicity_free);
        assert_eq!(s.len(), 2);
        let z = s.points.points[0].z().unwrap();
        assert!((z - 0.5).norm() < 1e-12);
    }

    #[test]
    fn nesting_and_exact_period() {
        let f = poly(&[-1, 0, 1]);
        let p2 = per_n(&f, 2).unwrap();
        let p4 = per_n(&f, 4).unwrap();
        for p in &p2.points.points {
            assert!(p4.points.points.iter().any(|q| q.chordal_distance(p) <= 1e-8));
        }
        let exact = exact_period(&f, &p2).unwrap();
        assert_eq!(exact.len(), 2); // 0 and -1
    }

    #[test]
    fn fast_mode_refined_by_certified() {
        let f = poly(&[1, 0, 1]);
        for n in 1..=4 {
            let cert = galois_degrees(&f, n, DegreeMode::Certified).unwrap();
            let fast = galois_degrees(&f, n, DegreeMode::Fast).unwrap();
            assert!(!fast.certified);
            for (_, prof) in &fast.mod_p_profiles {
                assert!(crate::factor::refines(prof, &cert.degrees()));
            }
            assert!(fast.max_degree() <= cert.max_degree());
        }
    }

    #[test]
    fn count_bound_formula() {
        assert_eq!(curve_count_bound(1, 2, 3), BigUint::from(24u32));
        assert_eq!(curve_count_bound(2, 2, 1), BigUint::from(24u32));
        assert_eq!(curve_count_bound(1, 2, 0), BigUint::from(3u32));
    }

    #[test]
    fn orbits_partition_the_set() {
        let f = poly(&[1, 0, 1]);
        let orbits = galois_orbits(&f, 3).unwrap();
        let total: usize = orbits.iter().map(|o| o.len()).sum();
        assert_eq!(total, per_n(&f, 3).unwrap().len());
        for o in orbits.iter().filter(|o| o.defining_form.is_some()) {
            assert_eq!(o.len(), o.defining_form.as_ref().unwrap().1);
        }
    }

    #[test]
    fn periodic_lines_of_squares() {
        let f = HomogeneousPoly::binary(&[1, 0, 0]).unwrap();
        let g = HomogeneousPoly::binary(&[0, 0, 1]).unwrap();
        let r = p2_periodic_lines(&f, &g, 1).unwrap();
        assert_eq!(r.lines.len(), 3);
        for l in &r.lines {
            assert_eq!(l.c_n_exact.as_ref().unwrap(), &BigRational::one());
            assert!(l.direct_check_error < 1e-12);
            assert!(l.root_checks.iter().all(|c| c.on_unit_circle && c.order.is_some()));
        }
        let r = p2_periodic_lines(&f, &g, 3).unwrap();
        for l in &r.lines {
            assert!(l.root_checks.iter().all(|c| c.on_unit_circle && c.order == Some(1)));
        }
    }

    #[test]
    fn periodic_lines_of_two_x_squared() {
        let f = HomogeneousPoly::binary(&[2, 0, 0]).unwrap();
        let g = HomogeneousPoly::binary(&[0, 0, 1]).unwrap();
        let r = p2_periodic_lines(&f, &g, 1).unwrap();
        let zero = r
            .lines
            .iter()
            .find(|l| l.lambda_exact.as_ref().is_some_and(|x| x.is_zero()))
            .unwrap();
        assert_eq!(zero.c_n_exact.as_ref().unwrap(), &BigRational::one());
        assert!(zero.direct_check_error < 1e-12);
        let half = r
            .lines
            .iter()
            .find(|l| l.lambda_exact == Some(BigRational::new(1.into(), 2.into())))
            .unwrap();
        assert!(half.direct_check_error < 1e-12);
        assert!(r.lines.iter().all(|l| l.residual < 1e-12));
    }
}
