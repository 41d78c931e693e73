//! Full-rank integer lattices in coefficient space, with exact LLL reduction.

use crate::error::{Error, Result};
use crate::poly::{big_log_abs, determinant};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// A lattice given by a square integer basis (rows are coefficient vectors).
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralLattice {
    pub dimension: usize,
    pub basis: Vec<Vec<BigInt>>,
    /// Indices of the rows in the list they were selected from.
    pub chosen: Vec<usize>,
    pub determinant: BigInt,
}

impl IntegralLattice {
    pub fn new(basis: Vec<Vec<BigInt>>, chosen: Vec<usize>) -> Result<Self> {
        let dimension = basis.len();
        if basis.iter().any(|r| r.len() != dimension) {
            return Err(Error::InvalidArgument("lattice basis must be square".into()));
        }
        let det = determinant(basis.clone());
        if det.is_zero() {
            return Err(Error::RankDeficient { rank: rank(&basis), needed: dimension });
        }
        Ok(IntegralLattice { dimension, basis, chosen, determinant: det })
    }

    /// The standard lattice Z^dim.
    pub fn standard(dim: usize) -> Self {
        let basis = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
        IntegralLattice { dimension: dim, basis, chosen: (0..dim).collect(), determinant: BigInt::one() }
    }

    /// log of the covolume |det|.
    pub fn log_covolume(&self) -> f64 {
        big_log_abs(&self.determinant)
    }

    /// Integer combination `sum coeffs[i] * basis[i]`.
    pub fn combine(&self, coeffs: &[i64]) -> Vec<BigInt> {
        combine(&self.basis, coeffs)
    }
}

pub fn combine(basis: &[Vec<BigInt>], coeffs: &[i64]) -> Vec<BigInt> {
    let dim = basis.first().map_or(0, |r| r.len());
    let mut out = vec![BigInt::zero(); dim];
    for (row, &c) in basis.iter().zip(coeffs) {
        if c != 0 {
            let c = BigInt::from(c);
            for (o, b) in out.iter_mut().zip(row) {
                *o += &c * b;
            }
        }
    }
    out
}

/// Rank over Q by fraction-free elimination.
pub fn rank(rows: &[Vec<BigInt>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        for i in r + 1..m.len() {
            if m[i][c].is_zero() {
                continue;
            }
            let (a, b) = (m[r][c].clone(), m[i][c].clone());
            for j in c..cols {
                let v = &m[i][j] * &a - &m[r][j] * &b;
                m[i][j] = v;
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).fold(BigRational::zero(), |s, (x, y)| s + x * y)
}

fn gram_schmidt(b: &[Vec<BigRational>]) -> (Vec<Vec<BigRational>>, Vec<Vec<BigRational>>, Vec<BigRational>) {
    let n = b.len();
    let mut bs: Vec<Vec<BigRational>> = Vec::with_capacity(n);
    let mut mu = vec![vec![BigRational::zero(); n]; n];
    let mut norms = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = b[i].clone();
        for j in 0..i {
            mu[i][j] = dot(&b[i], &bs[j]) / &norms[j];
            for (x, y) in v.iter_mut().zip(&bs[j]) {
                *x -= &mu[i][j] * y;
            }
        }
        norms.push(dot(&v, &v));
        bs.push(v);
    }
    (bs, mu, norms)
}

/// Exact LLL reduction (Lovasz parameter 3/4) of linearly independent integer rows.
pub fn lll_reduce(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = rows.len();
    let mut b: Vec<Vec<BigRational>> =
        rows.iter().map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect();
    if n <= 1 {
        return rows.to_vec();
    }
    let delta = BigRational::new(3.into(), 4.into());
    let half = BigRational::new(1.into(), 2.into());
    let (_, mut mu, mut norms) = gram_schmidt(&b);
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            if mu[k][j].abs() > half {
                let q = mu[k][j].round();
                let bj = b[j].clone();
                for (x, y) in b[k].iter_mut().zip(&bj) {
                    *x -= &q * y;
                }
                for l in 0..=j {
                    let sub = if l == j { q.clone() } else { &q * &mu[j][l] };
                    mu[k][l] -= sub;
                }
            }
        }
        let lhs = &norms[k];
        let rhs = (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &norms[k - 1];
        if *lhs >= rhs {
            k += 1;
        } else {
            b.swap(k, k - 1);
            let (_, m2, n2) = gram_schmidt(&b);
            mu = m2;
            norms = n2;
            k = (k - 1).max(1);
        }
    }
    b.into_iter().map(|r| r.into_iter().map(|x| x.to_integer()).collect()).collect()
}
