//! Aberth-Ehrlich simultaneous root finding.
//!
//! The iteration only needs the Newton ratio p/p' at a point, so callers can
//! supply evaluators that never expand the polynomial (for example by
//! iterating a map). Updates are Jacobi style: every correction of a sweep
//! uses the previous sweep's approximations, which keeps the result
//! independent of how the sweep is split across threads.

use num_complex::Complex64;
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct AberthResult {
    pub roots: Vec<Complex64>,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct AberthConfig {
    pub max_iter: usize,
    /// Relative step size at which a root counts as converged.
    pub tol: f64,
}

impl Default for AberthConfig {
    fn default() -> Self {
        AberthConfig { max_iter: 2000, tol: 1e-14 }
    }
}

/// Initial guesses on a circle, rotated off the real axis.
pub fn initial_circle(n: usize, radius: f64, offset: f64) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64 + offset;
            Complex64::from_polar(radius, t)
        })
        .collect()
}

/// Run Aberth-Ehrlich from `init` with a Newton-ratio evaluator z -> p(z)/p'(z).
pub fn aberth<F>(ratio: F, init: Vec<Complex64>, cfg: AberthConfig) -> AberthResult
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    let n = init.len();
    let mut z = init;
    let mut done = vec![false; n];
    let parallel = n >= 64;
    for it in 0..cfg.max_iter {
        let step = |k: usize| -> (Complex64, bool) {
            if done[k] {
                return (z[k], true);
            }
            let zk = z[k];
            let nk = ratio(zk);
            if !nk.is_finite() {
                return (zk, false);
            }
            let mut s = Complex64::new(0.0, 0.0);
            for (j, zj) in z.iter().enumerate() {
                if j != k {
                    s += 1.0 / (zk - zj);
                }
            }
            let denom = Complex64::new(1.0, 0.0) - nk * s;
            let w = if denom.norm() > 0.0 && denom.is_finite() { nk / denom } else { nk };
            let next = zk - w;
            let conv = w.norm() <= cfg.tol * zk.norm().max(1e-3);
            (next, conv)
        };
        let updates: Vec<(Complex64, bool)> = if parallel {
            (0..n).into_par_iter().map(step).collect()
        } else {
            (0..n).map(step).collect()
        };
        for (k, (v, c)) in updates.into_iter().enumerate() {
            if v.is_finite() {
                z[k] = v;
            }
            done[k] = done[k] || c;
        }
        if done.iter().all(|&d| d) {
            return AberthResult { roots: z, converged: true, iterations: it + 1 };
        }
    }
    AberthResult { roots: z, converged: false, iterations: cfg.max_iter }
}

/// Dense complex polynomial, coefficients low to high.
#[derive(Debug, Clone)]
pub struct ComplexPoly {
    pub coeffs: Vec<Complex64>,
}

impl ComplexPoly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        ComplexPoly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    fn eval_with_derivative(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for a in c.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        (p, dp)
    }

    /// Newton ratio p/p', evaluated through the reversed polynomial when |z| > 1.
    pub fn ratio(&self, z: Complex64) -> Complex64 {
        let n = self.degree() as f64;
        if z.norm() <= 1.0 {
            let (p, dp) = Self::eval_with_derivative(&self.coeffs, z);
            p / dp
        } else {
            let w = 1.0 / z;
            let rev: Vec<Complex64> = self.coeffs.iter().rev().copied().collect();
            let (q, dq) = Self::eval_with_derivative(&rev, w);
            z * q / (n * q - w * dq)
        }
    }

    /// All roots; the leading coefficient must be nonzero.
    pub fn roots(&self, cfg: AberthConfig, offset: f64) -> AberthResult {
        let n = self.degree();
        let lead = self.coeffs[n].norm();
        let low = self.coeffs.iter().find(|c| c.norm() > 0.0).map(|c| c.norm()).unwrap_or(1.0);
        let radius = (low / lead).powf(1.0 / n as f64).clamp(1e-3, 1e3);
        let init = initial_circle(n, radius, offset);
        aberth(|z| self.ratio(z), init, cfg)
    }

    /// max_k |coefficient of lc * prod (z - r_i) - coefficient of p| / max |coefficient of p|.
    pub fn reconstruction_error(&self, roots: &[Complex64]) -> f64 {
        let n = self.degree();
        // low-to-high coefficients of lc * prod (z - r)
        let mut prod = vec![self.coeffs[n]];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); prod.len() + 1];
            for (j, c) in prod.iter().enumerate() {
                next[j + 1] += c;
                next[j] -= r * c;
            }
            prod = next;
        }
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if prod.len() != n + 1 {
            return f64::INFINITY;
        }
        prod.iter()
            .zip(&self.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            / scale
    }
}
