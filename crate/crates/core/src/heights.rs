//! Local Green's functions and canonical heights with explicit error radii.
//!
//! Archimedean Green's functions are truncated escape rates
//! `G_m(x) = log ||F^m(x)|| / d^m`; Tate telescoping bounds the tail by
//! `C / (d^m (1 - 1/d))`, where `C` bounds `|log ||F(y)|| - d log ||y|||`.
//!
//! The constant `C` is certified on the max-norm sphere of P^1, which is the
//! union of the two discs `(1, w)` and `(w, 1)` with `|w| <= 1`. The upper
//! side is `log max_i sum_j |c_ij|`. For the lower side every point of a disc
//! lies within `h / sqrt(2)` of a square-grid point `g` with
//! `|g| <= 1 + h / sqrt(2)`, and on that enlarged disc the dehomogenized
//! component `F_i` is Lipschitz with constant `L_i = sum_k k |a_ik| rho^(k-1)`.
//! Hence `||F|| >= max_i (|F_i(g)| - L_i h / sqrt(2))` on the cell of `g`.
//!
//! Non-archimedean Green's functions are computed exactly: the primitive lift
//! is iterated modulo a power of p large enough to determine every valuation
//! drop, which is bounded by `v_p(Res(F))` on P^1.

use crate::dyncore::{HomogeneousMap, ProjPointC, ProjPointQ};
use crate::error::{Error, Result};
use crate::poly::{big_log_abs, valuation};
use crate::primes::factorize;
use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::Zero;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt;

/// A place of Q.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Archimedean,
    Prime(BigUint),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Archimedean => write!(f, "inf"),
            Place::Prime(p) => write!(f, "{p}"),
        }
    }
}

/// A truncated local Green's function with its error radius.
#[derive(Clone, Debug, PartialEq)]
pub struct GreenValue {
    pub value: f64,
    pub error_radius: f64,
    pub place: Place,
    pub iterations: u32,
    /// False when the error radius rests on a heuristic constant.
    pub certified: bool,
}

/// Bounds on `log ||F(y)|| - d log ||y||` over all y.
#[derive(Clone, Debug, PartialEq)]
pub struct DistortionConstant {
    /// Upper bound on `log ||F(y)|| - d log ||y||`.
    pub upper: f64,
    /// Upper bound on `-(log ||F(y)|| - d log ||y||)`.
    pub lower: f64,
    pub combined: f64,
    pub certified: bool,
    pub grid_spacing: f64,
}

/// Canonical height with its place decomposition.
#[derive(Clone, Debug)]
pub struct HeightValue {
    pub value: f64,
    pub error_radius: f64,
    pub per_place: BTreeMap<Place, GreenValue>,
    pub cross_check: Option<CrossCheck>,
}

/// Independent estimate `h(F^n(x)) / d^n` from exact integer iteration.
#[derive(Clone, Debug)]
pub struct CrossCheck {
    pub n: u32,
    pub value: f64,
    /// Rigorous bound on `|h_hat - value|`.
    pub bound: f64,
    pub agrees: bool,
}

fn chart_polys(map: &HomogeneousMap) -> [Vec<Vec<f64>>; 2] {
    let (a, b) = map.binary_f64();
    let d = map.degree() as usize;
    // chart (1, w): F_i(1, w) = sum_j c_ij w^(d-j); chart (w, 1): sum_j c_ij w^j.
    let rev = |v: &Vec<f64>| -> Vec<f64> { (0..=d).map(|k| v[d - k]).collect() };
    [vec![rev(&a), rev(&b)], vec![a, b]]
}

fn horner(c: &[f64], w: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * w + a)
}

/// Certified (raw grid minimum, Lipschitz-corrected minimum) of `||F||` on the max-sphere.
fn sphere_minimum_p1(map: &HomogeneousMap, h: f64) -> (f64, f64) {
    let charts = chart_polys(map);
    let slack_r = h / std::f64::consts::SQRT_2;
    let rho = 1.0 + slack_r;
    let k = (rho / h).ceil() as i64;
    let mut raw_min = f64::INFINITY;
    let mut cert_min = f64::INFINITY;
    for comps in &charts {
        let lips: Vec<f64> = comps
            .iter()
            .map(|c| {
                c.iter()
                    .enumerate()
                    .skip(1)
                    .map(|(j, a)| j as f64 * a.abs() * rho.powi(j as i32 - 1))
                    .sum()
            })
            .collect();
        let (r, c) = (-k..=k)
            .into_par_iter()
            .map(|i| {
                let mut rmin = f64::INFINITY;
                let mut cmin = f64::INFINITY;
                for j in -k..=k {
                    let g = Complex64::new(i as f64 * h, j as f64 * h);
                    if g.norm() > rho {
                        continue;
                    }
                    let mut best_raw: f64 = 0.0;
                    let mut best_cert = f64::NEG_INFINITY;
                    for (poly, l) in comps.iter().zip(&lips) {
                        let v = horner(poly, g).norm();
                        best_raw = best_raw.max(v);
                        best_cert = best_cert.max(v - l * slack_r);
                    }
                    if g.norm() <= 1.0 {
                        rmin = rmin.min(best_raw);
                    }
                    cmin = cmin.min(best_cert);
                }
                (rmin, cmin)
            })
            .reduce(|| (f64::INFINITY, f64::INFINITY), |a, b| (a.0.min(b.0), a.1.min(b.1)));
        raw_min = raw_min.min(r);
        cert_min = cert_min.min(c);
    }
    (raw_min, cert_min)
}

/// Heuristic minimum of `||F||` over a grid on the max-sphere of P^2.
fn sphere_minimum_p2(map: &HomogeneousMap, h: f64) -> f64 {
    let n = (1.0 / h).round() as i64;
    let pts: Vec<Complex64> = (-n..=n)
        .flat_map(|i| (-n..=n).map(move |j| Complex64::new(i as f64 * h, j as f64 * h)))
        .filter(|g| g.norm() <= 1.0)
        .collect();
    let one = Complex64::new(1.0, 0.0);
    (0..3)
        .into_par_iter()
        .map(|chart| {
            let mut m = f64::INFINITY;
            for a in &pts {
                for b in &pts {
                    let v = match chart {
                        0 => [one, *a, *b],
                        1 => [*a, one, *b],
                        _ => [*a, *b, one],
                    };
                    let y = map.eval_raw(&v);
                    m = m.min(y.iter().map(|c| c.norm()).fold(0.0, f64::max));
                }
            }
            m
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// Distortion constant of the lift with adaptive grid refinement.
pub fn distortion_constant(map: &HomogeneousMap) -> Result<DistortionConstant> {
    let upper = map
        .components()
        .iter()
        .map(|c| c.log_l1())
        .fold(f64::NEG_INFINITY, f64::max);
    match map.dim() {
        1 => {
            let mut h = 1.0 / 16.0;
            loop {
                let (raw, cert) = sphere_minimum_p1(map, h);
                let good = cert > 0.0 && raw - cert <= 0.01 * raw;
                if good || h < 1.0 / 1000.0 {
                    if cert <= 0.0 {
                        return Err(Error::CertificationFailed(format!(
                            "Lipschitz slack exceeds grid minimum {raw:e} at spacing {h}"
                        )));
                    }
                    let lower = -cert.ln();
                    return Ok(DistortionConstant {
                        upper,
                        lower,
                        combined: upper.abs().max(lower.abs()),
                        certified: true,
                        grid_spacing: h,
                    });
                }
                h /= 2.0;
            }
        }
        2 => {
            let h = 1.0 / 8.0;
            let m = sphere_minimum_p2(map, h);
            if m <= 0.0 {
                return Err(Error::CertificationFailed("image vanishes on the sphere grid".into()));
            }
            let lower = -m.ln();
            Ok(DistortionConstant {
                upper,
                lower,
                combined: upper.abs().max(lower.abs()),
                certified: false,
                grid_spacing: h,
            })
        }
        _ => Err(Error::Unsupported("distortion constant needs N <= 2".into())),
    }
}

/// Truncated archimedean Green's function `log ||F^m(x)|| / d^m` of the lift represented by x.
pub fn green_arch(map: &HomogeneousMap, dc: &DistortionConstant, x: &ProjPointC, m: u32) -> Result<GreenValue> {
    if m == 0 {
        return Err(Error::InvalidArgument("green_arch needs m >= 1".into()));
    }
    let y = map.iterate(x, m)?;
    let d = map.degree() as f64;
    let dm = d.powi(m as i32);
    Ok(GreenValue {
        value: y.log_scale / dm,
        error_radius: dc.combined / (dm * (1.0 - 1.0 / d)),
        place: Place::Archimedean,
        iterations: m,
        certified: dc.certified,
    })
}

/// Bad prime together with the bound on per-step valuation drops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BadPrime {
    pub p: BigUint,
    /// Max valuation drop of one step (v_p(Res) on P^1; user supplied otherwise).
    pub max_drop: u32,
}

/// Green's functions and heights for a fixed lift.
#[derive(Clone, Debug)]
pub struct Heights {
    map: HomogeneousMap,
    pub distortion: DistortionConstant,
    pub bad: Vec<BadPrime>,
    /// True when the bad-prime data came from the exact resultant.
    pub bad_certified: bool,
}

impl Heights {
    /// For N = 1: certify the distortion constant and factor the resultant.
    pub fn new(map: &HomogeneousMap) -> Result<Self> {
        let distortion = distortion_constant(map)?;
        if map.dim() != 1 {
            return Err(Error::Unsupported(
                "bad primes of N >= 2 lifts must be supplied with Heights::with_bad_primes".into(),
            ));
        }
        let res = map
            .resultant()
            .ok_or_else(|| Error::Unsupported("resultant unavailable".into()))?;
        let bad = factorize(res.magnitude())
            .into_iter()
            .map(|(p, e)| BadPrime { p, max_drop: e })
            .collect();
        Ok(Heights { map: map.clone(), distortion, bad, bad_certified: true })
    }

    /// Caller-asserted bad primes (required for N >= 2).
    pub fn with_bad_primes(map: &HomogeneousMap, bad: Vec<BadPrime>) -> Result<Self> {
        let distortion = distortion_constant(map)?;
        Ok(Heights { map: map.clone(), distortion, bad, bad_certified: false })
    }

    pub fn map(&self) -> &HomogeneousMap {
        &self.map
    }

    pub fn green_arch(&self, x: &ProjPointC, m: u32) -> Result<GreenValue> {
        green_arch(&self.map, &self.distortion, x, m)
    }

    /// Truncated p-adic Green's function of the primitive lift of x.
    pub fn green_padic(&self, x: &ProjPointQ, p: &BigUint, m: u32) -> Result<GreenValue> {
        let place = Place::Prime(p.clone());
        let Some(bad) = self.bad.iter().find(|b| &b.p == p) else {
            return Ok(GreenValue { value: 0.0, error_radius: 0.0, place, iterations: m, certified: true });
        };
        let d = self.map.degree() as f64;
        let r = bad.max_drop;
        let pb = BigInt::from(p.clone());
        let logp = big_log_abs(&pb);
        // Each step loses at most r digits of p-adic precision.
        let prec = (m as u64 + 1) * (r as u64 + 1) + 1;
        if prec > 1 << 16 {
            return Err(Error::CapExceeded { requested: prec, cap: 1 << 16 });
        }
        let mut modulus = pb.pow(prec as u32);
        let mut y: Vec<BigInt> = x.coords().iter().map(|c| c.mod_floor(&modulus)).collect();
        let mut acc = 0.0f64;
        let mut observed_max = 0u32;
        for _ in 0..m {
            let z = self.map.eval_exact(&y);
            let e = z
                .iter()
                .map(|c| {
                    let c = c.mod_floor(&modulus);
                    if c.is_zero() {
                        u32::MAX
                    } else {
                        valuation(&c, &pb)
                    }
                })
                .min()
                .unwrap();
            if e == u32::MAX || (self.bad_certified && e > r) {
                return Err(Error::CertificationFailed(format!(
                    "valuation drop at {p} exceeds the resultant bound"
                )));
            }
            observed_max = observed_max.max(e);
            let pe = pb.pow(e);
            modulus = &modulus / &pe;
            y = z.iter().map(|c| (c / &pe).mod_floor(&modulus)).collect();
            acc = acc * d + e as f64;
        }
        let dm = d.powi(m as i32);
        let bound = if self.bad_certified { r } else { observed_max.max(r) };
        Ok(GreenValue {
            value: -logp * acc / dm,
            error_radius: logp * bound as f64 / dm,
            place,
            iterations: m,
            certified: self.bad_certified,
        })
    }

    /// Canonical height with total error radius at most `target_error`.
    pub fn canonical_height(&self, x: &ProjPointQ, target_error: f64) -> Result<HeightValue> {
        if target_error <= 0.0 || target_error.is_nan() {
            return Err(Error::InvalidArgument("target_error must be positive".into()));
        }
        let d = self.map.degree() as f64;
        let places = 1 + self.bad.len();
        let budget = target_error / places as f64;
        let steps_for = |c: f64, factor: f64| -> u32 {
            let mut m = 1u32;
            while c * factor / d.powi(m as i32) > budget && m < 4000 {
                m += 1;
            }
            m
        };
        let mut per_place = BTreeMap::new();
        let m_arch = steps_for(self.distortion.combined, 1.0 / (1.0 - 1.0 / d));
        let mut arch = self.green_arch(&x.to_complex(), m_arch)?;
        arch.value += x.log_max_abs();
        per_place.insert(Place::Archimedean, arch);
        for b in &self.bad {
            let logp = big_log_abs(&BigInt::from(b.p.clone()));
            let m_p = steps_for(b.max_drop as f64 * logp, 1.0);
            let g = self.green_padic(x, &b.p, m_p)?;
            per_place.insert(g.place.clone(), g);
        }
        let value = per_place.values().map(|g| g.value).sum();
        let error_radius = per_place.values().map(|g| g.error_radius).sum();
        let cross_check = self.cross_check(x, value, error_radius);
        Ok(HeightValue { value, error_radius, per_place, cross_check })
    }

    /// `h(F^n(x)) / d^n` for the largest n with the exact iterate below 2^16 bits.
    fn cross_check(&self, x: &ProjPointQ, value: f64, error_radius: f64) -> Option<CrossCheck> {
        let d = self.map.degree() as f64;
        let c_total = self.distortion.combined
            + self
                .bad
                .iter()
                .map(|b| b.max_drop as f64 * big_log_abs(&BigInt::from(b.p.clone())))
                .sum::<f64>();
        let mut y = x.clone();
        let mut best: Option<CrossCheck> = None;
        for n in 1..=40u32 {
            let next = self.map.apply(&y).ok()?;
            let bits: u64 = next.coords().iter().map(|c| c.bits()).max().unwrap_or(0);
            if bits > 1 << 16 {
                break;
            }
            y = next;
            let dn = d.powi(n as i32);
            let est = y.log_max_abs() / dn;
            let bound = c_total / (dn * (d - 1.0));
            best = Some(CrossCheck {
                n,
                value: est,
                bound,
                agrees: (est - value).abs() <= bound + error_radius + 1e-12 * value.abs().max(1.0),
            });
        }
        best
    }
}

/// Naive logarithmic height of a rational point, `log max |x_i|` of the primitive lift.
pub fn naive_height(x: &ProjPointQ) -> f64 {
    x.log_max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sq() -> HomogeneousMap {
        HomogeneousMap::binary(&[1, 0, 0], &[0, 0, 1]).unwrap()
    }

    fn jouk() -> HomogeneousMap {
        HomogeneousMap::binary(&[1, 0, 1], &[0, 2, 0]).unwrap()
    }

    /// Brute-force oracle: min and max of ||F|| on a fine grid of the max-sphere.
    fn oracle_extrema(map: &HomogeneousMap, h: f64) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        let n = (1.0 / h) as i64;
        for i in -n..=n {
            for j in -n..=n {
                let w = Complex64::new(i as f64 * h, j as f64 * h);
                if w.norm() > 1.0 {
                    continue;
                }
                for v in [[c(1.0), w], [w, c(1.0)]] {
                    let y = map.eval_raw(&v);
                    let m = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
                    lo = lo.min(m);
                    hi = hi.max(m);
                }
            }
        }
        (lo, hi)
    }

    #[test]
    fn distortion_examples() {
        let dc = distortion_constant(&sq()).unwrap();
        assert_eq!(dc.combined, 0.0);
        let two = HomogeneousMap::binary(&[2, 0, 0], &[0, 0, 1]).unwrap();
        let dc = distortion_constant(&two).unwrap();
        assert!((dc.upper - 2f64.ln()).abs() < 1e-15);
        assert!((dc.combined - 2f64.ln()).abs() < 1e-15);
        let dc = distortion_constant(&jouk()).unwrap();
        let (lo, hi) = oracle_extrema(&jouk(), 1e-3);
        assert!(dc.upper >= hi.ln() - 1e-12);
        assert!(dc.lower >= -lo.ln() - 1e-12);
        assert!(dc.combined <= 2f64.ln() + 0.05);
    }

    #[test]
    fn green_arch_examples() {
        let f = sq();
        let dc = distortion_constant(&f).unwrap();
        let x = ProjPointC::new(vec![c(2.0), c(1.0)]).unwrap();
        let g = green_arch(&f, &dc, &x, 5).unwrap();
        assert_eq!(g.value, 0.0);
        assert_eq!(g.value + 2f64.ln(), 2f64.ln());
        let one = ProjPointC::new(vec![c(1.0), c(1.0)]).unwrap();
        let g = green_arch(&f, &dc, &one, 7).unwrap();
        assert_eq!((g.value, g.error_radius), (0.0, 0.0));
        let j = jouk();
        let dc = distortion_constant(&j).unwrap();
        let x = ProjPointC::new(vec![c(1.0), c(0.0)]).unwrap();
        let g20 = green_arch(&j, &dc, &x, 20).unwrap();
        let g40 = green_arch(&j, &dc, &x, 40).unwrap();
        assert!((g20.value - g40.value).abs() <= g20.error_radius);
        assert!(g40.error_radius < g20.error_radius);
    }

    #[test]
    fn green_padic_examples() {
        let h = Heights::new(&sq()).unwrap();
        let x = ProjPointQ::from_i64(&[2, 1]).unwrap();
        let g = h.green_padic(&x, &BigUint::from(2u32), 10).unwrap();
        assert_eq!((g.value, g.error_radius), (0.0, 0.0));
        let x = ProjPointQ::from_i64(&[1, 3]).unwrap();
        assert_eq!(h.green_padic(&x, &BigUint::from(5u32), 4).unwrap().value, 0.0);
        // (2x^2, y^2): F(1,1) = (2,1), F^2 = (8,1), F^3 = (128,1): no gcds, G_{2,3} = 0
        let two = Heights::new(&HomogeneousMap::binary(&[2, 0, 0], &[0, 0, 1]).unwrap()).unwrap();
        let x = ProjPointQ::from_i64(&[1, 1]).unwrap();
        let g = two.green_padic(&x, &BigUint::from(2u32), 3).unwrap();
        assert_eq!(g.value, 0.0);
        assert!((g.error_radius - 2.0 * 2f64.ln() / 8.0).abs() < 1e-15);
    }

    /// Exact oracle for p-adic Green's functions: iterate over Z and track valuations.
    fn padic_oracle(map: &HomogeneousMap, x: &[i64], p: u64, m: u32) -> f64 {
        let pb = BigInt::from(p);
        let mut y: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
        let mut total = 0.0;
        let d = map.degree() as f64;
        for k in 0..m {
            let z = map.eval_exact(&y);
            let e = z.iter().filter(|c| !c.is_zero()).map(|c| valuation(c, &pb)).min().unwrap();
            total += e as f64 * d.powi((m - 1 - k) as i32);
            let pe = pb.pow(e);
            y = z.into_iter().map(|c| c / &pe).collect();
        }
        -(p as f64).ln() * total / d.powi(m as i32)
    }

    #[test]
    fn green_padic_matches_exact_oracle_at_bad_prime() {
        // (x^2 + 2y^2, 4y^2): Res = 16, drops happen at 2
        let f = HomogeneousMap::binary(&[1, 0, 2], &[0, 0, 4]).unwrap();
        let h = Heights::new(&f).unwrap();
        for x in [[1i64, 1], [3, 2], [2, 1], [5, 4]] {
            let q = ProjPointQ::from_i64(&x).unwrap();
            for m in 1..6 {
                let g = h.green_padic(&q, &BigUint::from(2u32), m).unwrap();
                let o = padic_oracle(&f, &x, 2, m);
                assert!((g.value - o).abs() < 1e-12, "{x:?} m={m}: {} vs {o}", g.value);
            }
        }
    }

    #[test]
    fn canonical_height_examples() {
        let h = Heights::new(&sq()).unwrap();
        let v = h.canonical_height(&ProjPointQ::from_i64(&[2, 3]).unwrap(), 1e-9).unwrap();
        assert!((v.value - 3f64.ln()).abs() <= 1e-9);
        let v = h.canonical_height(&ProjPointQ::from_i64(&[1, 1]).unwrap(), 1e-9).unwrap();
        assert!(v.value.abs() <= 1e-12);
        let j = Heights::new(&jouk()).unwrap();
        let one = ProjPointQ::from_i64(&[1, 1]).unwrap();
        assert_eq!(jouk().apply(&one).unwrap(), one);
        let v = j.canonical_height(&one, 1e-8).unwrap();
        assert!(v.value.abs() <= v.error_radius + 1e-12);
        assert!(v.cross_check.unwrap().agrees);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        #[test]
        fn functional_equation_and_bookkeeping(a in -10_000i64..10_000, b in 1i64..10_000) {
            let f = HomogeneousMap::binary(&[1, 0, -1], &[0, 1, 2]).unwrap();
            let h = Heights::new(&f).unwrap();
            let x = ProjPointQ::from_i64(&[a, b]).unwrap();
            let hx = h.canonical_height(&x, 1e-8).unwrap();
            let fx = f.apply(&x).unwrap();
            let hfx = h.canonical_height(&fx, 1e-8).unwrap();
            let d = f.degree() as f64;
            prop_assert!((hfx.value - d * hx.value).abs() <= hfx.error_radius + d * hx.error_radius + 1e-9);
            prop_assert!(hx.value >= -hx.error_radius);
            let sum: f64 = hx.per_place.values().map(|g| g.value).sum();
            prop_assert!((sum - hx.value).abs() <= 1e-12);
            prop_assert!(hx.cross_check.as_ref().unwrap().agrees);
        }

        #[test]
        fn error_radius_decreases_with_m(m in 1u32..30) {
            let h = Heights::new(&jouk()).unwrap();
            let x = ProjPointC::new(vec![c(0.3), c(1.0)]).unwrap();
            let a = h.green_arch(&x, m).unwrap();
            let b = h.green_arch(&x, m + 1).unwrap();
            prop_assert!(b.error_radius < a.error_radius);
        }
    }
}
