//! Homogeneous integer lifts of endomorphisms of P^N.
//!
//! A [`HomogeneousMap`] stores the exact integer components F_0..F_N of a lift
//! together with binary64 copies used for numeric evaluation. Numeric points
//! ([`ProjPointC`]) carry a unit max-norm coordinate vector plus the log of the
//! scale factor, so iterating never overflows: the point represents the affine
//! lift `exp(log_scale) * coords`.

use crate::error::{Error, Result};
use crate::poly::{big_log_abs, big_to_f64, resultant_forms, UPoly};
use crate::primes::factorize;
use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::path::Path;

/// Default cap on the symbolic degree d^m of exact compositions.
pub const DEFAULT_DEGREE_CAP: u64 = 4096;

/// Below this max-modulus an image is treated as the zero vector.
pub const DEGENERATE_THRESHOLD: f64 = 1e-300;

/// Homogeneous polynomial with exact integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomogeneousPoly {
    num_vars: usize,
    degree: u32,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl HomogeneousPoly {
    /// Build from explicit terms. Duplicate exponent vectors are rejected,
    /// zero coefficients dropped, and at least one term must survive.
    pub fn new(num_vars: usize, degree: u32, terms: Vec<(Vec<u32>, BigInt)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != num_vars {
                return Err(Error::InvalidArgument(format!(
                    "exponent vector {e:?} has {} entries, expected {num_vars}",
                    e.len()
                )));
            }
            if e.iter().map(|&k| k as u64).sum::<u64>() != degree as u64 {
                return Err(Error::InvalidArgument(format!(
                    "exponent vector {e:?} does not sum to degree {degree}"
                )));
            }
            if map.contains_key(&e) {
                return Err(Error::InvalidArgument(format!("duplicate exponent vector {e:?}")));
            }
            map.insert(e, c);
        }
        map.retain(|_, c| !c.is_zero());
        if map.is_empty() {
            return Err(Error::InvalidArgument("polynomial has no nonzero coefficient".into()));
        }
        Ok(HomogeneousPoly { num_vars, degree, terms: map })
    }

    /// Binary form from coefficients of x^d, x^(d-1) y, ..., y^d.
    pub fn binary(coeffs_high_to_low: &[i64]) -> Result<Self> {
        let d = coeffs_high_to_low.len() - 1;
        let terms = coeffs_high_to_low
            .iter()
            .enumerate()
            .map(|(i, &c)| (vec![(d - i) as u32, i as u32], BigInt::from(c)))
            .collect();
        Self::new(2, d as u32, terms)
    }

    /// Binary form from the dehomogenized polynomial p(z) = F(z, 1) and a declared degree.
    pub fn from_upoly(p: &UPoly, degree: u32) -> Result<Self> {
        let terms = p
            .coeffs()
            .iter()
            .enumerate()
            .map(|(j, c)| (vec![j as u32, degree - j as u32], c.clone()))
            .collect();
        Self::new(2, degree, terms)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigInt)> {
        self.terms.iter()
    }

    /// F(z, 1) as a univariate polynomial (binary forms only).
    pub fn to_upoly(&self) -> UPoly {
        assert_eq!(self.num_vars, 2, "to_upoly needs a binary form");
        let mut v = vec![BigInt::zero(); self.degree as usize + 1];
        for (e, c) in &self.terms {
            v[e[0] as usize] = c.clone();
        }
        UPoly::new(v)
    }

    pub fn eval_big(&self, x: &[BigInt]) -> BigInt {
        let mut pows: Vec<Vec<BigInt>> = Vec::with_capacity(x.len());
        for xi in x {
            let mut row = Vec::with_capacity(self.degree as usize + 1);
            let mut acc = BigInt::one();
            for _ in 0..=self.degree {
                row.push(acc.clone());
                acc *= xi;
            }
            pows.push(row);
        }
        let mut s = BigInt::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                t *= &pows[i][k as usize];
            }
            s += t;
        }
        s
    }

    pub fn mul(&self, o: &HomogeneousPoly) -> HomogeneousPoly {
        let mut map: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *map.entry(e).or_default() += c1 * c2;
            }
        }
        map.retain(|_, c| !c.is_zero());
        HomogeneousPoly { num_vars: self.num_vars, degree: self.degree + o.degree, terms: map }
    }

    /// Substitute homogeneous polynomials of a common degree for the variables.
    pub fn compose(&self, subs: &[HomogeneousPoly]) -> Result<HomogeneousPoly> {
        assert_eq!(subs.len(), self.num_vars);
        let e = subs[0].degree;
        let nv = subs[0].num_vars;
        let mut pow_cache: Vec<Vec<HomogeneousPoly>> = Vec::new();
        for s in subs {
            let one = HomogeneousPoly {
                num_vars: nv,
                degree: 0,
                terms: BTreeMap::from([(vec![0; nv], BigInt::one())]),
            };
            let mut row = vec![one];
            for k in 1..=self.degree as usize {
                let next = row[k - 1].mul(s);
                row.push(next);
            }
            pow_cache.push(row);
        }
        let mut acc: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (ex, c) in &self.terms {
            let mut t = HomogeneousPoly {
                num_vars: nv,
                degree: 0,
                terms: BTreeMap::from([(vec![0; nv], c.clone())]),
            };
            for (i, &k) in ex.iter().enumerate() {
                t = t.mul(&pow_cache[i][k as usize]);
            }
            for (m, v) in t.terms {
                *acc.entry(m).or_default() += v;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        if acc.is_empty() {
            return Err(Error::DegenerateMap("composition vanishes identically".into()));
        }
        Ok(HomogeneousPoly { num_vars: nv, degree: self.degree * e, terms: acc })
    }

    fn numeric(&self) -> NumericPoly {
        NumericPoly {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), big_to_f64(c))).collect(),
        }
    }

    /// Sum of absolute values of coefficients, as a natural log.
    pub fn log_l1(&self) -> f64 {
        let s: BigInt = self.terms.values().map(|c| c.abs()).sum();
        big_log_abs(&s)
    }
}

#[derive(Clone, Debug)]
struct NumericPoly {
    terms: Vec<(Vec<u32>, f64)>,
}

impl NumericPoly {
    fn eval(&self, pows: &[Vec<Complex64>]) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = Complex64::new(*c, 0.0);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t *= pows[i][k as usize];
                }
            }
            s += t;
        }
        s
    }

    fn eval_grad(&self, pows: &[Vec<Complex64>], out: &mut [Complex64]) -> Complex64 {
        for g in out.iter_mut() {
            *g = Complex64::new(0.0, 0.0);
        }
        let mut s = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = Complex64::new(*c, 0.0);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t *= pows[i][k as usize];
                }
            }
            s += t;
            for v in 0..e.len() {
                if e[v] == 0 {
                    continue;
                }
                let mut g = Complex64::new(*c * e[v] as f64, 0.0);
                for (i, &k) in e.iter().enumerate() {
                    let kk = if i == v { k - 1 } else { k };
                    if kk > 0 {
                        g *= pows[i][kk as usize];
                    }
                }
                out[v] += g;
            }
        }
        s
    }
}

fn power_table(x: &[Complex64], d: usize) -> Vec<Vec<Complex64>> {
    x.iter()
        .map(|&xi| {
            let mut row = Vec::with_capacity(d + 1);
            let mut acc = Complex64::new(1.0, 0.0);
            for _ in 0..=d {
                row.push(acc);
                acc *= xi;
            }
            row
        })
        .collect()
}

/// Complex projective point: unit max-norm coordinates plus the log of the lift's scale.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjPointC {
    pub coords: Vec<Complex64>,
    pub log_scale: f64,
}

fn max_modulus(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

impl ProjPointC {
    /// Normalize a coordinate vector to max modulus 1; `log_scale` starts at 0.
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        let m = max_modulus(&coords);
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidArgument("projective point needs finite, not-all-zero coordinates".into()));
        }
        Ok(ProjPointC { coords: coords.into_iter().map(|c| c / m).collect(), log_scale: 0.0 })
    }

    /// The point [z : 1] of P^1.
    pub fn affine(z: Complex64) -> Self {
        if z.norm() <= 1.0 {
            ProjPointC { coords: vec![z, Complex64::new(1.0, 0.0)], log_scale: 0.0 }
        } else {
            ProjPointC { coords: vec![Complex64::new(1.0, 0.0), 1.0 / z], log_scale: 0.0 }
        }
    }

    /// The point [1 : 0] of P^1.
    pub fn infinity() -> Self {
        ProjPointC { coords: vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], log_scale: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    /// Affine coordinate x/y on P^1, `None` at infinity.
    pub fn z(&self) -> Option<Complex64> {
        let y = self.coords[1];
        if y == Complex64::new(0.0, 0.0) {
            None
        } else {
            Some(self.coords[0] / y)
        }
    }

    pub fn is_infinity(&self) -> bool {
        self.coords.len() == 2 && self.coords[1] == Complex64::new(0.0, 0.0)
    }

    /// Same projective point with `log_scale` reset to 0.
    pub fn unit_lift(&self) -> Self {
        ProjPointC { coords: self.coords.clone(), log_scale: 0.0 }
    }

    /// Chordal (Fubini-Study sine) distance between two points of P^1.
    pub fn chordal_distance(&self, o: &ProjPointC) -> f64 {
        let a = &self.coords;
        let b = &o.coords;
        let na: f64 = a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if a.len() == 2 {
            (a[0] * b[1] - a[1] * b[0]).norm() / (na * nb)
        } else {
            // sin of angle between lines: sqrt(1 - |<a,b>|^2)
            let ip: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
            let c = (ip.norm() / (na * nb)).min(1.0);
            (1.0 - c * c).max(0.0).sqrt()
        }
    }

    /// Rotate the phase so the first max-modulus coordinate is real positive.
    pub fn phase_aligned(&self) -> Vec<Complex64> {
        let idx = self
            .coords
            .iter()
            .position(|c| (c.norm() - 1.0).abs() < 1e-12)
            .unwrap_or(0);
        let ph = self.coords[idx] / self.coords[idx].norm();
        self.coords.iter().map(|c| c / ph).collect()
    }
}

/// Rational projective point with coprime integer coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjPointQ {
    coords: Vec<BigInt>,
}

impl ProjPointQ {
    pub fn new(coords: Vec<BigInt>) -> Result<Self> {
        let g = coords.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
        if g.is_zero() {
            return Err(Error::InvalidArgument("all coordinates are zero".into()));
        }
        Ok(ProjPointQ { coords: coords.into_iter().map(|c| c / &g).collect() })
    }

    pub fn from_i64(coords: &[i64]) -> Result<Self> {
        Self::new(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    /// log max |x_i| of the primitive lift.
    pub fn log_max_abs(&self) -> f64 {
        self.coords
            .iter()
            .filter(|c| !c.is_zero())
            .map(big_log_abs)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Numeric point of the same projective class (unit-normalized, `log_scale` 0).
    pub fn to_complex(&self) -> ProjPointC {
        let lmax = self.log_max_abs();
        let coords = self
            .coords
            .iter()
            .map(|c| {
                if c.is_zero() {
                    Complex64::new(0.0, 0.0)
                } else {
                    let s = if c.is_negative() { -1.0 } else { 1.0 };
                    Complex64::new(s * (big_log_abs(c) - lmax).exp(), 0.0)
                }
            })
            .collect();
        ProjPointC { coords, log_scale: 0.0 }
    }
}

/// Exact homogeneous lift F = (F_0, ..., F_N) of a degree-d endomorphism of P^N.
#[derive(Clone, Debug)]
pub struct HomogeneousMap {
    dim: usize,
    degree: u32,
    components: Vec<HomogeneousPoly>,
    /// |Res(F)| for N = 1.
    resultant: Option<BigInt>,
    numeric: Vec<NumericPoly>,
}

impl HomogeneousMap {
    /// Validate and build. N = 1 requires a nonzero resultant; N >= 2 runs a
    /// randomized smoke test rejecting maps whose image vanishes at a sample point.
    pub fn new(components: Vec<HomogeneousPoly>) -> Result<Self> {
        let map = Self::unchecked(components)?;
        if map.dim == 1 {
            let f0 = map.components[0].to_upoly();
            let f1 = map.components[1].to_upoly();
            let d = map.degree as usize;
            let r = resultant_forms(&f0, d, &f1, d).abs();
            if r.is_zero() {
                return Err(Error::DegenerateMap("resultant of the lift is zero".into()));
            }
            Ok(HomogeneousMap { resultant: Some(r), ..map })
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0xD1CE);
            for _ in 0..100 {
                let coords = (0..=map.dim)
                    .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect();
                let x = ProjPointC::new(coords)?;
                if map.evaluate(&x).is_err() {
                    return Err(Error::DegenerateMap("image vanishes at a sample point".into()));
                }
            }
            Ok(map)
        }
    }

    fn unchecked(components: Vec<HomogeneousPoly>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::InvalidArgument("need at least two components".into()));
        }
        let nv = components.len();
        let degree = components[0].degree;
        if degree < 2 {
            return Err(Error::InvalidArgument("degree must be at least 2".into()));
        }
        for c in &components {
            if c.num_vars != nv {
                return Err(Error::InvalidArgument(format!(
                    "component has {} variables, expected {nv}",
                    c.num_vars
                )));
            }
            if c.degree != degree {
                return Err(Error::InvalidArgument("components differ in degree".into()));
            }
        }
        let numeric = components.iter().map(|c| c.numeric()).collect();
        Ok(HomogeneousMap { dim: nv - 1, degree, components, resultant: None, numeric })
    }

    /// Binary map from coefficient lists of x^d ... y^d for each component.
    pub fn binary(f0: &[i64], f1: &[i64]) -> Result<Self> {
        Self::new(vec![HomogeneousPoly::binary(f0)?, HomogeneousPoly::binary(f1)?])
    }

    /// Lift (p(x, y), y^d) of a polynomial p(z) given by coefficients from z^0 upward.
    pub fn polynomial(coeffs_low_to_high: &[i64]) -> Result<Self> {
        let d = coeffs_low_to_high.len() - 1;
        let hi: Vec<i64> = coeffs_low_to_high.iter().rev().copied().collect();
        let mut f1 = vec![0i64; d + 1];
        f1[d] = 1;
        Self::binary(&hi, &f1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn components(&self) -> &[HomogeneousPoly] {
        &self.components
    }

    /// |Res(F)|, present for N = 1 unless too large to have been formed.
    pub fn resultant(&self) -> Option<&BigInt> {
        self.resultant.as_ref()
    }

    /// For N = 1: the dehomogenized components F_0(z,1), F_1(z,1).
    pub fn binary_upolys(&self) -> (UPoly, UPoly) {
        assert_eq!(self.dim, 1);
        (self.components[0].to_upoly(), self.components[1].to_upoly())
    }

    /// binary64 coefficient lists (index j = coefficient of x^j y^(d-j)) for N = 1.
    pub fn binary_f64(&self) -> (Vec<f64>, Vec<f64>) {
        let (a, b) = self.binary_upolys();
        let d = self.degree as usize;
        let pad = |p: &UPoly| {
            let mut v = p.to_f64();
            v.resize(d + 1, 0.0);
            v
        };
        (pad(&a), pad(&b))
    }

    /// Raw image F(v) of a coordinate vector (no normalization).
    pub fn eval_raw(&self, v: &[Complex64]) -> Vec<Complex64> {
        let pows = power_table(v, self.degree as usize);
        self.numeric.iter().map(|p| p.eval(&pows)).collect()
    }

    /// Image and Jacobian (rows = components) of a coordinate vector.
    pub fn eval_with_jacobian(&self, v: &[Complex64]) -> (Vec<Complex64>, Vec<Vec<Complex64>>) {
        let pows = power_table(v, self.degree as usize);
        let mut jac = vec![vec![Complex64::new(0.0, 0.0); v.len()]; self.numeric.len()];
        let vals = self
            .numeric
            .iter()
            .zip(jac.iter_mut())
            .map(|(p, row)| p.eval_grad(&pows, row))
            .collect();
        (vals, jac)
    }

    /// One step F(x), renormalized to max modulus 1. The log of the
    /// normalization is added to `d * log_scale`, so the result is the exact lift F(X).
    pub fn evaluate(&self, x: &ProjPointC) -> Result<ProjPointC> {
        let y = self.eval_raw(&x.coords);
        let m = max_modulus(&y);
        if !(m.is_finite() && m >= DEGENERATE_THRESHOLD) {
            return Err(Error::DegenerateImage);
        }
        Ok(ProjPointC {
            coords: y.into_iter().map(|c| c / m).collect(),
            log_scale: self.degree as f64 * x.log_scale + m.ln(),
        })
    }

    /// F^m(x) by repeated evaluation.
    pub fn iterate(&self, x: &ProjPointC, m: u32) -> Result<ProjPointC> {
        let mut p = x.clone();
        for _ in 0..m {
            p = self.evaluate(&p)?;
        }
        Ok(p)
    }

    /// Exact image of an integer vector.
    pub fn eval_exact(&self, x: &[BigInt]) -> Vec<BigInt> {
        self.components.iter().map(|c| c.eval_big(x)).collect()
    }

    /// Image of a rational point (primitive representative).
    pub fn apply(&self, x: &ProjPointQ) -> Result<ProjPointQ> {
        ProjPointQ::new(self.eval_exact(x.coords()))
            .map_err(|_| Error::DegenerateImage)
    }

    /// Exact lift F^(m) of degree d^m, with the default degree cap.
    pub fn compose_exact(&self, m: u32) -> Result<HomogeneousMap> {
        self.compose_exact_capped(m, DEFAULT_DEGREE_CAP)
    }

    pub fn compose_exact_capped(&self, m: u32, cap: u64) -> Result<HomogeneousMap> {
        if m == 0 {
            return Err(Error::InvalidArgument("compose_exact needs m >= 1".into()));
        }
        let total = (self.degree as u64).checked_pow(m).unwrap_or(u64::MAX);
        if total > cap {
            return Err(Error::CapExceeded { requested: total, cap });
        }
        let mut cur = self.clone();
        for _ in 1..m {
            cur = self.compose_with(&cur)?;
        }
        Ok(cur)
    }

    /// F composed with G (F applied after G).
    pub fn compose_with(&self, g: &HomogeneousMap) -> Result<HomogeneousMap> {
        let comps = if self.dim == 1 {
            // Binary forms compose fastest in the dehomogenized coordinate.
            let (g0, g1) = g.binary_upolys();
            let e = g.degree as usize;
            let d = self.degree as usize;
            let p0 = (0..=d).map(|j| g0.pow(j as u32)).collect::<Vec<_>>();
            let p1 = (0..=d).map(|j| g1.pow(j as u32)).collect::<Vec<_>>();
            let mut out = Vec::new();
            for c in &self.components {
                let cp = c.to_upoly();
                let mut acc = UPoly::zero();
                for j in 0..=d {
                    let cj = cp.coeff(j);
                    if cj.is_zero() {
                        continue;
                    }
                    acc = acc.add(&p0[j].mul(&p1[d - j]).scale(&cj));
                }
                out.push(HomogeneousPoly::from_upoly(&acc, (d * e) as u32)?);
            }
            out
        } else {
            self.components
                .iter()
                .map(|c| c.compose(&g.components))
                .collect::<Result<Vec<_>>>()?
        };
        let mut h = Self::unchecked(comps)?;
        if self.dim == 1 {
            h.resultant = composed_resultant(self, g);
        }
        Ok(h)
    }

    /// Primes dividing Res(F), ascending (N = 1 only).
    pub fn bad_primes(&self) -> Result<Vec<BigUint>> {
        if self.dim != 1 {
            return Err(Error::Unsupported("bad primes need an exact resultant (N = 1)".into()));
        }
        let r = self
            .resultant
            .as_ref()
            .ok_or_else(|| Error::Unsupported("resultant too large to form".into()))?;
        Ok(factorize(&r.magnitude().clone()).into_iter().map(|(p, _)| p).collect())
    }

    /// True for lifts (a x^d, b y^d) with |a| = |b|, whose equilibrium measure is uniform on |z| = 1.
    pub fn is_unit_monomial(&self) -> bool {
        if self.dim != 1 {
            return false;
        }
        let d = self.degree;
        let single = |p: &HomogeneousPoly, e: Vec<u32>| {
            p.terms.len() == 1 && p.terms.keys().next() == Some(&e)
        };
        if !single(&self.components[0], vec![d, 0]) || !single(&self.components[1], vec![0, d]) {
            return false;
        }
        let a = self.components[0].terms.values().next().unwrap().abs();
        let b = self.components[1].terms.values().next().unwrap().abs();
        a == b
    }

    /// Parse the map-spec text format.
    pub fn parse(text: &str) -> Result<Self> {
        parse_map(text)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Serialize to the map-spec text format (explicit monomial form).
    pub fn to_spec(&self) -> String {
        let mut s = format!("dim: {}\ndegree: {}\n", self.dim, self.degree);
        for (i, c) in self.components.iter().enumerate() {
            let mons: Vec<String> = c
                .terms
                .iter()
                .map(|(e, v)| {
                    let es: Vec<String> = e.iter().map(|k| k.to_string()).collect();
                    format!("{v};{}", es.join(","))
                })
                .collect();
            s.push_str(&format!("F{i}: {}\n", mons.join(" ")));
        }
        s
    }
}

/// |Res(F o G)| = |Res(F)|^deg(G) |Res(G)|^(deg F)^2, formed only when small.
fn composed_resultant(f: &HomogeneousMap, g: &HomogeneousMap) -> Option<BigInt> {
    let rf = f.resultant.as_ref()?;
    let rg = g.resultant.as_ref()?;
    let e1 = g.degree as u64;
    let e2 = (f.degree as u64).pow(2);
    let bits = rf.bits() * e1 + rg.bits() * e2;
    if bits > 1 << 20 {
        return None;
    }
    Some(rf.pow(e1 as u32) * rg.pow(e2 as u32))
}

fn parse_coeff(tok: &str, line: usize) -> Result<(BigInt, BigInt)> {
    let err = || Error::Parse { line, msg: format!("bad coefficient `{tok}`") };
    let t = tok.trim_start_matches('+');
    if let Some((a, b)) = t.split_once('/') {
        let num: BigInt = a.parse().map_err(|_| err())?;
        let den: BigInt = b.parse().map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        Ok((num, den))
    } else {
        Ok((t.parse().map_err(|_| err())?, BigInt::one()))
    }
}

fn parse_map(text: &str) -> Result<HomogeneousMap> {
    let mut dim: Option<usize> = None;
    let mut degree: Option<u32> = None;
    let mut comps: BTreeMap<usize, (usize, Vec<(Vec<u32>, BigInt, BigInt)>)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line
            .split_once(':')
            .ok_or_else(|| Error::Parse { line: line_no, msg: "expected `key: value`".into() })?;
        let key = key.trim();
        let rest = rest.trim();
        match key {
            "dim" => {
                dim = Some(rest.parse().map_err(|_| Error::Parse { line: line_no, msg: "bad dim".into() })?)
            }
            "degree" => {
                degree =
                    Some(rest.parse().map_err(|_| Error::Parse { line: line_no, msg: "bad degree".into() })?)
            }
            k if k.starts_with('F') => {
                let i: usize = k[1..]
                    .parse()
                    .map_err(|_| Error::Parse { line: line_no, msg: format!("bad component name `{k}`") })?;
                let (Some(n), Some(d)) = (dim, degree) else {
                    return Err(Error::Parse { line: line_no, msg: "dim and degree must precede components".into() });
                };
                let mut terms = Vec::new();
                let toks: Vec<&str> = rest.split_whitespace().collect();
                if toks.iter().all(|t| !t.contains(';')) {
                    if n != 1 {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: "coefficient shorthand is only valid for dim 1".into(),
                        });
                    }
                    if toks.len() != d as usize + 1 {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("expected {} coefficients, found {}", d + 1, toks.len()),
                        });
                    }
                    for (j, t) in toks.iter().enumerate() {
                        let (num, den) = parse_coeff(t, line_no)?;
                        terms.push((vec![d - j as u32, j as u32], num, den));
                    }
                } else {
                    for t in toks {
                        let (c, e) = t
                            .split_once(';')
                            .ok_or_else(|| Error::Parse { line: line_no, msg: format!("bad monomial `{t}`") })?;
                        let (num, den) = parse_coeff(c, line_no)?;
                        let ex: Vec<u32> = e
                            .split(',')
                            .map(|s| s.trim().parse::<u32>())
                            .collect::<std::result::Result<_, _>>()
                            .map_err(|_| Error::Parse { line: line_no, msg: format!("bad exponents `{e}`") })?;
                        terms.push((ex, num, den));
                    }
                }
                if comps.insert(i, (line_no, terms)).is_some() {
                    return Err(Error::Parse { line: line_no, msg: format!("component F{i} given twice") });
                }
            }
            _ => return Err(Error::Parse { line: line_no, msg: format!("unknown key `{key}`") }),
        }
    }
    let n = dim.ok_or(Error::Parse { line: 0, msg: "missing dim".into() })?;
    let d = degree.ok_or(Error::Parse { line: 0, msg: "missing degree".into() })?;
    if comps.len() != n + 1 || comps.keys().copied().ne(0..=n) {
        return Err(Error::Parse { line: 0, msg: format!("expected components F0..F{n}") });
    }
    // Clear denominators with one common multiplier.
    let lcm = comps
        .values()
        .flat_map(|(_, t)| t.iter().map(|(_, _, den)| den.abs()))
        .fold(BigInt::one(), |a, b| a.lcm(&b));
    let mut polys = Vec::new();
    for (_, (line, terms)) in comps {
        let t = terms
            .into_iter()
            .map(|(e, num, den)| (e, num * &lcm / den))
            .collect();
        polys.push(HomogeneousPoly::new(n + 1, d, t).map_err(|e| Error::Parse { line, msg: e.to_string() })?);
    }
    HomogeneousMap::new(polys)
}

/// A finite collection of points, optionally Galois-stable with an exact defining form.
#[derive(Clone, Debug, Default)]
pub struct PointCloud {
    pub points: Vec<ProjPointC>,
    /// Binary form (dehomogenized, with declared degree) whose roots are the points.
    pub defining_form: Option<(UPoly, usize)>,
    pub label: String,
}

impl PointCloud {
    pub fn new(points: Vec<ProjPointC>) -> Self {
        PointCloud { points, defining_form: None, label: String::new() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sq() -> HomogeneousMap {
        HomogeneousMap::binary(&[1, 0, 0], &[0, 0, 1]).unwrap()
    }

    fn joukowski() -> HomogeneousMap {
        HomogeneousMap::binary(&[1, 0, 1], &[0, 2, 0]).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let f = sq();
        let one = ProjPointC::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let y = f.evaluate(&one).unwrap();
        assert_eq!(y.coords, one.coords);
        assert_eq!(y.log_scale, 0.0);
        let inf = ProjPointC::infinity();
        let y = f.evaluate(&inf).unwrap();
        assert_eq!(y.coords, inf.coords);
        assert_eq!(y.log_scale, 0.0);
        let y = joukowski().evaluate(&one).unwrap();
        assert_eq!(y.coords, one.coords);
        assert!((y.log_scale - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn iterate_examples() {
        let f = sq();
        let x = ProjPointC::new(vec![c(2.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(x.coords, vec![c(1.0, 0.0), c(0.5, 0.0)]);
        let y = f.iterate(&x, 3).unwrap();
        assert_eq!(y.log_scale, 0.0);
        assert_eq!(y.coords, vec![c(1.0, 0.0), c(2f64.powi(-8), 0.0)]);
        assert_eq!(f.iterate(&x, 0).unwrap(), x);
        let one = ProjPointC::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let y = f.iterate(&one, 10).unwrap();
        assert_eq!(y, one);
    }

    #[test]
    fn degenerate_image_is_reported() {
        // (x y, y^2) has Res 0; build without the check to probe evaluate.
        let f = HomogeneousMap::unchecked(vec![
            HomogeneousPoly::binary(&[0, 1, 0]).unwrap(),
            HomogeneousPoly::binary(&[0, 0, 1]).unwrap(),
        ])
        .unwrap();
        assert!(matches!(f.evaluate(&ProjPointC::infinity()), Err(Error::DegenerateImage)));
        assert!(matches!(
            HomogeneousMap::binary(&[0, 1, 0], &[0, 0, 1]),
            Err(Error::DegenerateMap(_))
        ));
    }

    #[test]
    fn compose_examples() {
        let f = sq();
        let f2 = f.compose_exact(2).unwrap();
        assert_eq!(f2.components()[0], HomogeneousPoly::binary(&[1, 0, 0, 0, 0]).unwrap());
        assert_eq!(f2.components()[1], HomogeneousPoly::binary(&[0, 0, 0, 0, 1]).unwrap());
        // ((x^2+y^2)^2 + 4x^2y^2, 4xy(x^2+y^2))
        let j2 = joukowski().compose_exact(2).unwrap();
        assert_eq!(j2.components()[0], HomogeneousPoly::binary(&[1, 0, 6, 0, 1]).unwrap());
        assert_eq!(j2.components()[1], HomogeneousPoly::binary(&[0, 4, 0, 4, 0]).unwrap());
        let j1 = joukowski().compose_exact(1).unwrap();
        assert_eq!(j1.components(), joukowski().components());
        assert!(matches!(f.compose_exact(13), Err(Error::CapExceeded { requested: 8192, cap: 4096 })));
    }

    #[test]
    fn bad_prime_examples() {
        assert!(sq().bad_primes().unwrap().is_empty());
        let f = HomogeneousMap::binary(&[2, 0, 0], &[0, 0, 1]).unwrap();
        assert_eq!(f.bad_primes().unwrap(), vec![BigUint::from(2u32)]);
        let f = HomogeneousMap::binary(&[1, 0, 1], &[0, 0, 1]).unwrap();
        assert!(f.bad_primes().unwrap().is_empty());
        let f = HomogeneousMap::binary(&[1, 0, -1], &[0, 1, 0]).unwrap();
        assert_eq!(f.resultant().unwrap(), &BigInt::from(1));
        // Joukowski lift: Res = 16 (hand Sylvester: 2^4)
        assert_eq!(joukowski().bad_primes().unwrap(), vec![BigUint::from(2u32)]);
    }

    #[test]
    fn composed_resultants_nonzero_and_match_sylvester() {
        let maps = [
            HomogeneousMap::binary(&[1, 0, -1], &[0, 0, 1]).unwrap(),
            HomogeneousMap::binary(&[1, 0, 1], &[0, 0, 1]).unwrap(),
            joukowski(),
            HomogeneousMap::binary(&[2, 0, -1], &[0, 0, 1]).unwrap(),
            HomogeneousMap::binary(&[1, 0, -1], &[0, 1, 2]).unwrap(),
            HomogeneousMap::binary(&[3, 1, 0, 2], &[0, 1, 0, 5]).unwrap(),
        ];
        for f in maps {
            let f2 = f.compose_exact(2).unwrap();
            let (a, b) = f2.binary_upolys();
            let d = f2.degree() as usize;
            let syl = resultant_forms(&a, d, &b, d).abs();
            assert!(!syl.is_zero());
            assert_eq!(&syl, f2.resultant().unwrap());
        }
    }

    #[test]
    fn parse_formats() {
        let text = "# z^2 - 1\ndim: 1\ndegree: 2\nF0: 1 0 -1\nF1: 0 0 1\n";
        let f = HomogeneousMap::parse(text).unwrap();
        assert_eq!(f.components(), HomogeneousMap::polynomial(&[-1, 0, 1]).unwrap().components());
        let text = "dim: 1\ndegree: 2\nF0: 1;2,0 1;0,2  # x^2+y^2\nF1: 2;1,1\n";
        let g = HomogeneousMap::parse(text).unwrap();
        assert_eq!(g.components(), joukowski().components());
        // rational coefficients are cleared by the lcm of denominators
        let text = "dim: 1\ndegree: 2\nF0: 1/2 0 1/2\nF1: 0 1 0\n";
        let h = HomogeneousMap::parse(text).unwrap();
        assert_eq!(h.components(), joukowski().components());
        let round = HomogeneousMap::parse(&g.to_spec()).unwrap();
        assert_eq!(round.components(), g.components());
        let p2 = "dim: 2\ndegree: 2\nF0: 1;2,0,0\nF1: 1;0,2,0\nF2: 1;0,0,2\n";
        assert_eq!(HomogeneousMap::parse(p2).unwrap().dim(), 2);
        assert!(matches!(HomogeneousMap::parse("dim: 1\n"), Err(Error::Parse { .. })));
        assert!(matches!(
            HomogeneousMap::parse("dim: 1\ndegree: 2\nF0: 1 0\nF1: 0 0 1\n"),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn poly_invariants_enforced() {
        assert!(HomogeneousPoly::new(2, 2, vec![(vec![1, 0], BigInt::one())]).is_err());
        assert!(HomogeneousPoly::new(2, 2, vec![(vec![2, 0], BigInt::zero())]).is_err());
        assert!(HomogeneousPoly::new(
            2,
            2,
            vec![(vec![2, 0], BigInt::one()), (vec![2, 0], BigInt::one())]
        )
        .is_err());
    }

    #[test]
    fn jacobian_matches_difference_quotient() {
        let f = HomogeneousMap::binary(&[3, 1, -2], &[1, 0, 5]).unwrap();
        let v = vec![c(0.3, -0.2), c(0.7, 0.1)];
        let (_, jac) = f.eval_with_jacobian(&v);
        let h = 1e-6;
        for k in 0..2 {
            let mut vp = v.clone();
            vp[k] += h;
            let mut vm = v.clone();
            vm[k] -= h;
            let fp = f.eval_raw(&vp);
            let fm = f.eval_raw(&vm);
            for i in 0..2 {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                assert!((fd - jac[i][k]).norm() < 1e-7);
            }
        }
    }

    fn arb_point() -> impl Strategy<Value = ProjPointC> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_filter_map("nonzero", |(a, b, c2, d)| {
            ProjPointC::new(vec![c(a, b), c(c2, d)]).ok()
        })
    }

    proptest! {
        #[test]
        fn iterate_composes(x in arb_point(), a in 0u32..5, b in 0u32..5) {
            let f = HomogeneousMap::binary(&[1, 0, -1], &[0, 1, 2]).unwrap();
            let direct = f.iterate(&x, a + b).unwrap();
            let split = f.iterate(&f.iterate(&x, a).unwrap(), b).unwrap();
            let tol = 1e-10 * direct.log_scale.abs().max(1.0);
            prop_assert!((direct.log_scale - split.log_scale).abs() <= tol);
            for (p, q) in direct.coords.iter().zip(&split.coords) {
                prop_assert!((p - q).norm() < 1e-10);
            }
        }

        #[test]
        fn evaluate_is_scale_invariant(x in arb_point(), theta in 0.0f64..6.28) {
            let f = joukowski();
            let ph = Complex64::from_polar(1.0, theta);
            let rot = ProjPointC { coords: x.coords.iter().map(|v| v * ph).collect(), log_scale: 0.0 };
            let a = f.evaluate(&x).unwrap();
            let b = f.evaluate(&rot).unwrap();
            prop_assert!((a.log_scale - b.log_scale).abs() < 1e-12);
            for (p, q) in a.phase_aligned().iter().zip(&b.phase_aligned()) {
                prop_assert!((p - q).norm() < 1e-12);
            }
        }
    }
}
