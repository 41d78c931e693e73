//! Exact univariate integer polynomials, binary forms and resultants.
//!
//! A binary form of degree D is stored as a [`UPoly`] in z = x/y together
//! with its declared degree; the coefficient of z^j is the coefficient of
//! x^j y^(D-j). A form whose top coefficients vanish has roots at infinity.

use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

/// Natural log of |x| for an arbitrarily large integer. Returns -inf for 0.
pub fn big_log_abs(x: &BigInt) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.abs().to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top: BigInt = x.abs() >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Lossy conversion that saturates to +-inf instead of failing.
pub fn big_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(if x.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// Dense integer polynomial, coefficients from low to high degree, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct UPoly {
    coeffs: Vec<BigInt>,
}

impl fmt::Debug for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UPoly[")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

impl UPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        UPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    /// The monomial c z^k.
    pub fn monomial(c: BigInt, k: usize) -> Self {
        let mut v = vec![BigInt::zero(); k + 1];
        v[k] = c;
        Self::new(v)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn lc(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn add(&self, o: &UPoly) -> UPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let v = (0..n)
            .map(|i| self.coeff(i) + o.coeff(i))
            .collect();
        UPoly::new(v)
    }

    pub fn sub(&self, o: &UPoly) -> UPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let v = (0..n)
            .map(|i| self.coeff(i) - o.coeff(i))
            .collect();
        UPoly::new(v)
    }

    pub fn neg(&self) -> UPoly {
        UPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn mul(&self, o: &UPoly) -> UPoly {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero();
        }
        let mut v = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        UPoly::new(v)
    }

    pub fn scale(&self, c: &BigInt) -> UPoly {
        UPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Multiply by z^k.
    pub fn shift(&self, k: usize) -> UPoly {
        if self.is_zero() {
            return UPoly::zero();
        }
        let mut v = vec![BigInt::zero(); k];
        v.extend(self.coeffs.iter().cloned());
        UPoly::new(v)
    }

    pub fn pow(&self, e: u32) -> UPoly {
        let mut acc = UPoly::constant(BigInt::one());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    /// gcd of the coefficients (nonnegative); 0 for the zero polynomial.
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Primitive part with positive leading coefficient.
    pub fn primitive(&self) -> UPoly {
        if self.is_zero() {
            return UPoly::zero();
        }
        let mut c = self.content();
        if self.lc().is_negative() {
            c = -c;
        }
        UPoly::new(self.coeffs.iter().map(|a| a / &c).collect())
    }

    /// Pseudo-remainder of self by a nonzero divisor (scaled remainder, up to a unit in Q).
    pub fn pseudo_rem(&self, b: &UPoly) -> UPoly {
        assert!(!b.is_zero(), "division by zero polynomial");
        let db = b.deg();
        let lb = b.lc();
        let mut r = self.clone();
        while !r.is_zero() && r.deg() >= db {
            let k = r.deg() - db;
            let lr = r.lc();
            r = r.scale(&lb).sub(&b.scale(&lr).shift(k));
        }
        r
    }

    /// Exact quotient self / b over Z, or `None` if b does not divide self in Z[z].
    pub fn div_exact(&self, b: &UPoly) -> Option<UPoly> {
        assert!(!b.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(UPoly::zero());
        }
        if self.deg() < b.deg() {
            return None;
        }
        let db = b.deg();
        let lb = b.lc();
        let mut r = self.coeffs.clone();
        let mut q = vec![BigInt::zero(); self.deg() - db + 1];
        for k in (0..q.len()).rev() {
            let top = &r[k + db];
            if top.is_zero() {
                continue;
            }
            let (qk, rem) = top.div_rem(&lb);
            if !rem.is_zero() {
                return None;
            }
            for (i, bc) in b.coeffs.iter().enumerate() {
                r[k + i] -= &qk * bc;
            }
            q[k] = qk;
        }
        if r.iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(UPoly::new(q))
    }

    /// Primitive gcd over Z[z] with positive leading coefficient.
    pub fn gcd(&self, o: &UPoly) -> UPoly {
        let mut a = self.primitive();
        let mut b = o.primitive();
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        if a.deg() < b.deg() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b).primitive();
            a = b;
            b = r;
        }
        a.primitive()
    }

    /// Primitive squarefree part.
    pub fn squarefree_part(&self) -> UPoly {
        if self.deg() == 0 {
            return self.primitive();
        }
        let g = self.gcd(&self.derivative());
        self.primitive().div_exact(&g).expect("gcd divides").primitive()
    }

    /// Squarefree decomposition: list of (primitive factor, multiplicity), product
    /// equal to the primitive part of self up to sign. Constant factors are skipped.
    pub fn squarefree_decomposition(&self) -> Vec<(UPoly, u32)> {
        let mut out = Vec::new();
        if self.deg() == 0 {
            return out;
        }
        // f_k has the roots of self of multiplicity >= k, with multiplicity reduced by k-1.
        let mut f = self.primitive();
        let mut ge_k = f.squarefree_part();
        let mut k = 1u32;
        loop {
            let g = f.gcd(&f.derivative());
            let next = g.squarefree_part();
            let exact = ge_k.div_exact(&next).expect("nested squarefree parts").primitive();
            if exact.deg() > 0 {
                out.push((exact, k));
            }
            if g.deg() == 0 {
                break;
            }
            f = g;
            ge_k = next;
            k += 1;
        }
        out
    }

    pub fn eval_big(&self, z: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Homogeneous evaluation of the degree-D form with these coefficients at (a, b).
    pub fn eval_form_big(&self, total_degree: usize, a: &BigInt, b: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        let mut bpow = BigInt::one();
        let mut bp = Vec::with_capacity(total_degree + 1);
        for _ in 0..=total_degree {
            bp.push(bpow.clone());
            bpow *= b;
        }
        let mut apow = BigInt::one();
        for (j, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc += c * &apow * &bp[total_degree - j];
            }
            apow *= a;
        }
        acc
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(big_to_f64).collect()
    }

    pub fn eval_c(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + big_to_f64(c);
        }
        acc
    }

    /// Coefficients reversed with respect to a declared degree D: z^D p(1/z).
    pub fn reversed(&self, total_degree: usize) -> UPoly {
        let mut v = vec![BigInt::zero(); total_degree + 1];
        for (j, c) in self.coeffs.iter().enumerate() {
            v[total_degree - j] = c.clone();
        }
        UPoly::new(v)
    }

    /// Max-modulus of the coefficients, as a natural log.
    pub fn log_height(&self) -> f64 {
        self.coeffs
            .iter()
            .filter(|c| !c.is_zero())
            .map(big_log_abs)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Sylvester resultant of two binary forms of declared degrees d and e.
pub fn resultant_forms(f: &UPoly, d: usize, g: &UPoly, e: usize) -> BigInt {
    let n = d + e;
    if n == 0 {
        return BigInt::one();
    }
    let mut m = vec![vec![BigInt::zero(); n]; n];
    // Rows use coefficients from x^d down to y^d.
    for r in 0..e {
        for j in 0..=d {
            m[r][r + j] = f.coeff(d - j);
        }
    }
    for r in 0..d {
        for j in 0..=e {
            m[e + r][r + j] = g.coeff(e - j);
        }
    }
    determinant(m)
}

/// Integer determinant by fraction-free Bareiss elimination.
pub fn determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = 1;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(x: &BigInt, p: &BigInt) -> u32 {
    assert!(!x.is_zero(), "valuation of zero");
    let mut v = 0;
    let mut y = x.clone();
    loop {
        let (q, r) = y.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        y = q;
        v += 1;
    }
}

pub fn is_negative(x: &BigInt) -> bool {
    x.sign() == Sign::Minus
}
