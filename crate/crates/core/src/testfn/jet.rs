//! Truncated order-3 Taylor arithmetic in two real variables.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Multi-indices (i, j) with i + j <= 3, in graded order.
pub const INDICES: [(usize, usize); 10] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

fn index_of(i: usize, j: usize) -> usize {
    let t = i + j;
    t * (t + 1) / 2 + j
}

const fn fact(n: usize) -> f64 {
    match n {
        0 | 1 => 1.0,
        2 => 2.0,
        _ => 6.0,
    }
}

/// Products of basis monomials that survive truncation: (a, b, a * b).
fn mul_table() -> &'static [(usize, usize, usize)] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<Vec<(usize, usize, usize)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::new();
        for (a, &(i1, j1)) in INDICES.iter().enumerate() {
            for (b, &(i2, j2)) in INDICES.iter().enumerate() {
                if i1 + i2 + j1 + j2 <= 3 {
                    t.push((a, b, index_of(i1 + i2, j1 + j2)));
                }
            }
        }
        t
    })
}

/// Taylor coefficients `c_ij` of `f(u0 + du, v0 + dv) = sum c_ij du^i dv^j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet(pub [f64; 10]);

impl Jet {
    pub fn constant(c: f64) -> Self {
        let mut a = [0.0; 10];
        a[0] = c;
        Jet(a)
    }

    /// The coordinate functions u and v at (u0, v0).
    pub fn variables(u0: f64, v0: f64) -> (Self, Self) {
        let mut u = [0.0; 10];
        let mut v = [0.0; 10];
        u[0] = u0;
        u[1] = 1.0;
        v[0] = v0;
        v[2] = 1.0;
        (Jet(u), Jet(v))
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    /// Partial derivative d^(i+j) f / du^i dv^j.
    pub fn partial(&self, i: usize, j: usize) -> f64 {
        self.0[index_of(i, j)] * fact(i) * fact(j)
    }

    /// All partials up to order 3 in the order of [`INDICES`].
    pub fn partials(&self) -> [f64; 10] {
        let mut out = [0.0; 10];
        for (k, &(i, j)) in INDICES.iter().enumerate() {
            out[k] = self.partial(i, j);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut a = self.0;
        a.iter_mut().for_each(|x| *x *= s);
        Jet(a)
    }

    /// `g(self)` given `g, g', g'', g'''` at the value of self.
    pub fn compose(&self, g: [f64; 4]) -> Self {
        let mut d = *self;
        d.0[0] = 0.0;
        let d2 = d * d;
        let d3 = d2 * d;
        let mut out = d.scale(g[1]) + d2.scale(g[2] / 2.0) + d3.scale(g[3] / 6.0);
        out.0[0] = g[0];
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut a = self.0;
        a.iter_mut().zip(o.0).for_each(|(x, y)| *x += y);
        Jet(a)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        let mut a = self.0;
        a.iter_mut().zip(o.0).for_each(|(x, y)| *x -= y);
        Jet(a)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut a = [0.0; 10];
        for &(i, j, k) in mul_table() {
            a[k] += self.0[i] * o.0[j];
        }
        Jet(a)
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

/// Arithmetic shared by plain values and jets, so profiles are written once.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn cst(c: f64) -> Self;
    fn val(&self) -> f64;
    /// Apply a scalar function given its value and first three derivatives.
    fn apply(&self, g: [f64; 4]) -> Self;

    fn recip(&self) -> Self {
        let x = self.val();
        let r = 1.0 / x;
        self.apply([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }

    fn exp(&self) -> Self {
        let e = self.val().exp();
        self.apply([e; 4])
    }

    fn sqrt(&self) -> Self {
        let s = self.val().sqrt();
        self.apply([s, 0.5 / s, -0.25 / (s * s * s), 0.375 / (s * s * s * s * s)])
    }

    fn abs(&self) -> Self {
        if self.val() < 0.0 {
            -*self
        } else {
            *self
        }
    }
}

impl Scalar for f64 {
    fn cst(c: f64) -> Self {
        c
    }
    fn val(&self) -> f64 {
        *self
    }
    fn apply(&self, g: [f64; 4]) -> Self {
        g[0]
    }
    fn recip(&self) -> Self {
        1.0 / self
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
}

impl Scalar for Jet {
    fn cst(c: f64) -> Self {
        Jet::constant(c)
    }
    fn val(&self) -> f64 {
        self.0[0]
    }
    fn apply(&self, g: [f64; 4]) -> Self {
        self.compose(g)
    }
}

/// Smooth step: 0 for t <= 0, 1 for t >= 1, `E(t) / (E(t) + E(1 - t))` between,
/// with `E(t) = exp(-1/t)`.
pub fn smooth_step<S: Scalar>(t: S) -> S {
    let v = t.val();
    if v <= 0.0 {
        return S::cst(0.0);
    }
    if v >= 1.0 {
        return S::cst(1.0);
    }
    let a = (-t.recip()).exp();
    let b = (-(S::cst(1.0) - t).recip()).exp();
    a / (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Oracle: polynomial with known derivatives.
    fn poly(u: Jet, v: Jet) -> Jet {
        u * u * v + v * v * v.scale(2.0) - u + Jet::constant(4.0)
    }

    #[test]
    fn polynomial_partials_are_exact() {
        let (u, v) = Jet::variables(1.5, -0.5);
        let p = poly(u, v);
        let (x, y) = (1.5f64, -0.5f64);
        assert!((p.value() - (x * x * y + 2.0 * y * y * y - x + 4.0)).abs() < 1e-14);
        assert!((p.partial(1, 0) - (2.0 * x * y - 1.0)).abs() < 1e-14);
        assert!((p.partial(0, 1) - (x * x + 6.0 * y * y)).abs() < 1e-14);
        assert!((p.partial(2, 0) - 2.0 * y).abs() < 1e-14);
        assert!((p.partial(1, 1) - 2.0 * x).abs() < 1e-14);
        assert!((p.partial(0, 2) - 12.0 * y).abs() < 1e-14);
        assert!((p.partial(2, 1) - 2.0).abs() < 1e-14);
        assert!((p.partial(0, 3) - 12.0).abs() < 1e-14);
        assert_eq!(p.partial(3, 0), 0.0);
    }

    #[test]
    fn step_endpoints() {
        assert_eq!(smooth_step(-0.1f64), 0.0);
        assert_eq!(smooth_step(1.5f64), 1.0);
        assert!((smooth_step(0.5f64) - 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn univariate_functions_match_closed_forms(x in 0.2f64..3.0) {
            let (u, _) = Jet::variables(x, 0.0);
            let e = Scalar::exp(&u);
            let r = Scalar::recip(&u);
            let s = Scalar::sqrt(&u);
            for k in 0..4 {
                prop_assert!((e.partial(k, 0) - x.exp()).abs() < 1e-12 * x.exp());
            }
            prop_assert!((r.partial(3, 0) + 6.0 / x.powi(4)).abs() < 1e-10 / x.powi(4));
            prop_assert!((s.partial(2, 0) + 0.25 * x.powf(-1.5)).abs() < 1e-12 * x.powf(-1.5));
        }

        #[test]
        fn division_inverts_multiplication(a in 0.5f64..2.0, b in -1.0f64..1.0) {
            let (u, v) = Jet::variables(a, b);
            let p = u * u + v;
            let q = (p * u) / u;
            for k in 0..10 {
                prop_assert!((q.0[k] - p.0[k]).abs() < 1e-12);
            }
        }
    }
}
