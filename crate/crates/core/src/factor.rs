//! Factorization of squarefree integer polynomials (Zassenhaus).
//!
//! Pipeline: choose a good prime p, factor mod p by distinct-degree and
//! Cantor-Zassenhaus equal-degree splitting, lift the factorization to p^k
//! with linear Hensel steps, then recombine lifted factors by trial division
//! over subsets of increasing size.

use crate::error::{Error, Result};
use crate::poly::UPoly;
use crate::primes::{is_prime_u64, next_prime};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Default cap on the number of subsets tried during recombination.
pub const SUBSET_CAP: u64 = 1 << 20;

/// Polynomial over F_p, coefficients low to high, no trailing zeros.
type Fp = Vec<u64>;

fn trim(mut a: Fp) -> Fp {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let (mut t, mut nt) = (0i128, 1i128);
    let (mut r, mut nr) = (p as i128, a as i128);
    while nr != 0 {
        let q = r / nr;
        (t, nt) = (nt, t - q * nt);
        (r, nr) = (nr, r - q * nr);
    }
    assert_eq!(r, 1, "not invertible mod p");
    t.rem_euclid(p as i128) as u64
}

fn mulm(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn fp_sub(a: &Fp, b: &Fp, p: u64) -> Fp {
    let n = a.len().max(b.len());
    trim((0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect())
}

fn fp_mul(a: &Fp, b: &Fp, p: u64) -> Fp {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mulm(x, y, p)) % p;
        }
    }
    trim(out)
}

/// Quotient and remainder; divisor nonzero.
fn fp_divrem(a: &Fp, b: &Fp, p: u64) -> (Fp, Fp) {
    assert!(!b.is_empty());
    if a.len() < b.len() {
        return (Vec::new(), a.clone());
    }
    let inv = inv_mod(*b.last().unwrap(), p);
    let mut r = a.clone();
    let db = b.len() - 1;
    let mut q = vec![0u64; a.len() - db];
    for k in (0..q.len()).rev() {
        let c = mulm(r[k + db], inv, p);
        q[k] = c;
        if c != 0 {
            for (i, &bi) in b.iter().enumerate() {
                r[k + i] = (r[k + i] + p - mulm(c, bi, p)) % p;
            }
        }
    }
    r.truncate(db);
    (trim(q), trim(r))
}

fn fp_rem(a: &Fp, b: &Fp, p: u64) -> Fp {
    fp_divrem(a, b, p).1
}

fn fp_monic(a: &Fp, p: u64) -> Fp {
    if a.is_empty() {
        return Vec::new();
    }
    let inv = inv_mod(*a.last().unwrap(), p);
    a.iter().map(|&c| mulm(c, inv, p)).collect()
}

fn fp_gcd(a: &Fp, b: &Fp, p: u64) -> Fp {
    let (mut x, mut y) = (a.clone(), b.clone());
    while !y.is_empty() {
        let r = fp_rem(&x, &y, p);
        x = y;
        y = r;
    }
    fp_monic(&x, p)
}

/// Bezout coefficients s, t with s a + t b = 1 for coprime a, b.
fn fp_bezout(a: &Fp, b: &Fp, p: u64) -> (Fp, Fp) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1): (Fp, Fp) = (vec![1], Vec::new());
    let (mut t0, mut t1): (Fp, Fp) = (Vec::new(), vec![1]);
    while !r1.is_empty() {
        let (q, r) = fp_divrem(&r0, &r1, p);
        let s2 = fp_sub(&s0, &fp_mul(&q, &s1, p), p);
        let t2 = fp_sub(&t0, &fp_mul(&q, &t1, p), p);
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s2;
        t0 = t1;
        t1 = t2;
    }
    assert_eq!(r0.len(), 1, "Bezout inputs not coprime");
    let inv = inv_mod(r0[0], p);
    let sc = |v: &Fp| trim(v.iter().map(|&c| mulm(c, inv, p)).collect());
    (sc(&s0), sc(&t0))
}

fn fp_powmod(base: &Fp, exp: &BigUint, m: &Fp, p: u64) -> Fp {
    let mut result: Fp = vec![1];
    let b = fp_rem(base, m, p);
    for i in (0..exp.bits()).rev() {
        result = fp_rem(&fp_mul(&result, &result, p), m, p);
        if exp.bit(i) {
            result = fp_rem(&fp_mul(&result, &b, p), m, p);
        }
    }
    fp_rem(&result, m, p)
}

fn fp_derivative(a: &Fp, p: u64) -> Fp {
    trim(a.iter().enumerate().skip(1).map(|(i, &c)| mulm(c, i as u64 % p, p)).collect())
}

fn reduce(f: &UPoly, p: u64) -> Fp {
    let bp = BigInt::from(p);
    trim(f.coeffs().iter().map(|c| c.mod_floor(&bp).to_u64().unwrap()).collect())
}

/// True when p does not divide the leading coefficient and f stays squarefree mod p.
pub fn is_good_prime(f: &UPoly, p: u64) -> bool {
    let fp = reduce(f, p);
    if fp.len() != f.coeffs().len() {
        return false;
    }
    let g = fp_gcd(&fp, &fp_derivative(&fp, p), p);
    g.len() == 1
}

/// Distinct-degree factorization of a monic squarefree polynomial: (degree, product of factors of that degree).
fn ddf(f: &Fp, p: u64) -> Vec<(usize, Fp)> {
    let mut out = Vec::new();
    let mut f = f.clone();
    let x: Fp = vec![0, 1];
    let mut h = x.clone();
    let bp = BigUint::from(p);
    let mut i = 1;
    while f.len() > 2 * i {
        h = fp_powmod(&h, &bp, &f, p);
        let g = fp_gcd(&f, &fp_sub(&h, &x, p), p);
        if g.len() > 1 {
            out.push((i, g.clone()));
            f = fp_divrem(&f, &g, p).0;
            h = fp_rem(&h, &f, p);
        }
        i += 1;
    }
    if f.len() > 1 {
        out.push((f.len() - 1, f));
    }
    out
}

/// Split a monic product of irreducibles of equal degree k (p odd).
fn edf(f: &Fp, k: usize, p: u64, rng: &mut ChaCha8Rng) -> Vec<Fp> {
    let n = f.len() - 1;
    if n == k {
        return vec![f.clone()];
    }
    let exp = (BigUint::from(p).pow(k as u32) - 1u32) / 2u32;
    loop {
        let a: Fp = trim((0..n).map(|_| rng.random_range(0..p)).collect());
        if a.len() < 2 {
            continue;
        }
        let b = fp_sub(&fp_powmod(&a, &exp, f, p), &vec![1], p);
        let g = fp_gcd(f, &b, p);
        if g.len() > 1 && g.len() < f.len() {
            let h = fp_divrem(f, &g, p).0;
            let mut out = edf(&g, k, p, rng);
            out.extend(edf(&fp_monic(&h, p), k, p, rng));
            return out;
        }
    }
}

/// Degrees of the irreducible factors of f mod p, ascending (p must be good and odd).
pub fn factor_degrees_mod_p(f: &UPoly, p: u64) -> Vec<usize> {
    let fp = fp_monic(&reduce(f, p), p);
    let mut out = Vec::new();
    for (k, g) in ddf(&fp, p) {
        let count = (g.len() - 1) / k;
        out.extend(std::iter::repeat_n(k, count));
    }
    out.sort();
    out
}

fn factor_mod_p(f: &UPoly, p: u64, rng: &mut ChaCha8Rng) -> Vec<Fp> {
    let fp = fp_monic(&reduce(f, p), p);
    let mut out = Vec::new();
    for (k, g) in ddf(&fp, p) {
        out.extend(edf(&g, k, p, rng));
    }
    out
}

fn big_mod_poly(v: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    let mut out: Vec<BigInt> = v.iter().map(|c| c.mod_floor(m)).collect();
    while out.last().is_some_and(|c| c.is_zero()) {
        out.pop();
    }
    out
}

fn big_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn to_big(a: &Fp) -> Vec<BigInt> {
    a.iter().map(|&c| BigInt::from(c)).collect()
}

fn from_big_mod_p(a: &[BigInt], p: u64) -> Fp {
    let bp = BigInt::from(p);
    trim(a.iter().map(|c| c.mod_floor(&bp).to_u64().unwrap()).collect())
}

/// Lift f = g h (mod p), g and h monic and coprime, to f = G H (mod p^k).
/// `f` must be monic modulo p^k.
fn hensel_pair(f: &[BigInt], g: &Fp, h: &Fp, p: u64, k: u32) -> (Vec<BigInt>, Vec<BigInt>) {
    let (_, t) = fp_bezout(g, h, p);
    let bp = BigInt::from(p);
    let mut gg = to_big(g);
    let mut hh = to_big(h);
    let mut pj = bp.clone();
    for _ in 1..k {
        // e = (f - G H) / p^j, reduced mod p
        let prod = big_mul(&gg, &hh);
        let n = f.len().max(prod.len());
        let diff: Vec<BigInt> = (0..n)
            .map(|i| f.get(i).cloned().unwrap_or_default() - prod.get(i).cloned().unwrap_or_default())
            .collect();
        let e: Vec<BigInt> = diff.iter().map(|c| c / &pj).collect();
        let e = from_big_mod_p(&e, p);
        let te = fp_mul(&t, &e, p);
        let dg = fp_rem(&te, g, p);
        let rest = fp_sub(&e, &fp_mul(&dg, h, p), p);
        let (dh, r) = fp_divrem(&rest, g, p);
        debug_assert!(r.is_empty(), "Hensel step not exact");
        let add = |a: &mut Vec<BigInt>, d: &Fp| {
            for (i, &c) in d.iter().enumerate() {
                if i >= a.len() {
                    a.resize(i + 1, BigInt::zero());
                }
                a[i] += &pj * BigInt::from(c);
            }
        };
        add(&mut gg, &dg);
        add(&mut hh, &dh);
        pj *= &bp;
    }
    (big_mod_poly(&gg, &pj), big_mod_poly(&hh, &pj))
}

/// Lift a full factorization mod p of the monic-ized f to p^k.
fn hensel_multi(f: &[BigInt], factors: &[Fp], p: u64, k: u32, pk: &BigInt) -> Vec<Vec<BigInt>> {
    if factors.len() == 1 {
        return vec![big_mod_poly(f, pk)];
    }
    let g = &factors[0];
    let h = factors[1..].iter().fold(vec![1u64], |acc, q| fp_mul(&acc, q, p));
    let (gl, hl) = hensel_pair(f, g, &h, p, k);
    let mut out = vec![gl];
    out.extend(hensel_multi(&hl, &factors[1..], p, k, pk));
    out
}

/// Symmetric residue of each coefficient in (-m/2, m/2].
fn symmetric(v: &[BigInt], m: &BigInt) -> UPoly {
    let half = m / 2;
    UPoly::new(
        v.iter()
            .map(|c| {
                let r = c.mod_floor(m);
                if r > half {
                    r - m
                } else {
                    r
                }
            })
            .collect(),
    )
}

/// Result of a full factorization.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub factors: Vec<UPoly>,
    pub prime: u64,
    pub subsets_tried: u64,
}

/// Choose the good odd prime (among the first few) giving the fewest modular factors.
fn choose_prime(f: &UPoly) -> u64 {
    let mut best: Option<(usize, u64)> = None;
    let mut p = 2;
    let mut tried = 0;
    while tried < 8 {
        p = next_prime(p);
        if !is_good_prime(f, p) {
            continue;
        }
        tried += 1;
        let count = factor_degrees_mod_p(f, p).len();
        if best.is_none_or(|(c, _)| count < c) {
            best = Some((count, p));
        }
        if count == 1 {
            break;
        }
    }
    best.unwrap().1
}

/// Irreducible factors over Z of a primitive squarefree polynomial of positive degree.
/// Factors are primitive with positive leading coefficient, sorted by (degree, coefficients).
pub fn factor_squarefree(f: &UPoly, subset_cap: u64) -> Result<Factorization> {
    let f = f.primitive();
    if f.deg() == 0 {
        return Err(Error::InvalidArgument("cannot factor a constant".into()));
    }
    if f.deg() == 1 {
        return Ok(Factorization { factors: vec![f], prime: 0, subsets_tried: 0 });
    }
    // Pull out the factor z first so the constant-term check below is meaningful.
    let mut factors = Vec::new();
    let mut f = f;
    if f.coeff(0).is_zero() {
        factors.push(UPoly::from_i64(&[0, 1]));
        f = f.div_exact(&UPoly::from_i64(&[0, 1])).unwrap();
        if f.deg() == 0 {
            return Ok(Factorization { factors, prime: 0, subsets_tried: 0 });
        }
    }
    let p = choose_prime(&f);
    let mut rng = ChaCha8Rng::seed_from_u64(p ^ 0xFAC7);
    let modular = factor_mod_p(&f, p, &mut rng);
    if modular.len() == 1 {
        factors.push(f);
        factors.sort_by(cmp_poly);
        return Ok(Factorization { factors, prime: p, subsets_tried: 0 });
    }
    // Coefficient bound for any factor of lc * (factor): 2^n ||f||_2 |lc|.
    let n = f.deg();
    let norm2: BigInt = f.coeffs().iter().map(|c| c * c).sum::<BigInt>();
    let norm = norm2.sqrt() + 1;
    let lc = f.lc();
    let bound = (BigInt::one() << n) * norm * lc.abs();
    let bp = BigInt::from(p);
    let mut k = 1u32;
    let mut pk = bp.clone();
    while pk <= &bound * 2 {
        pk *= &bp;
        k += 1;
    }
    // Monic-ize f modulo p^k.
    let lc_inv = lc.modinv(&pk).expect("lc invertible mod p^k");
    let fm: Vec<BigInt> = f.coeffs().iter().map(|c| (c * &lc_inv).mod_floor(&pk)).collect();
    let lifted = hensel_multi(&fm, &modular, p, k, &pk);

    let mut remaining: Vec<Vec<BigInt>> = lifted;
    let mut cur = f;
    let mut s = 1;
    let mut tried: u64 = 0;
    'outer: while 2 * s <= remaining.len() {
        let r = remaining.len();
        let mut idx: Vec<usize> = (0..s).collect();
        loop {
            tried += 1;
            if tried > subset_cap {
                return Err(Error::CapExceeded { requested: tried, cap: subset_cap });
            }
            let lcc = cur.lc();
            let mut prod: Vec<BigInt> = vec![lcc.clone()];
            for &i in &idx {
                prod = big_mod_poly(&big_mul(&prod, &remaining[i]), &pk);
            }
            let cand = symmetric(&prod, &pk).primitive();
            let constant_ok =
                !cand.coeff(0).is_zero() && (cur.coeff(0) % cand.coeff(0)).is_zero();
            if constant_ok {
                if let Some(q) = cur.div_exact(&cand) {
                    factors.push(cand);
                    cur = q.primitive();
                    let mut keep = Vec::new();
                    for (i, v) in remaining.into_iter().enumerate() {
                        if !idx.contains(&i) {
                            keep.push(v);
                        }
                    }
                    remaining = keep;
                    continue 'outer;
                }
            }
            // next subset in lexicographic order
            let mut pos = s;
            loop {
                if pos == 0 {
                    s += 1;
                    continue 'outer;
                }
                pos -= 1;
                if idx[pos] < r - s + pos {
                    idx[pos] += 1;
                    for j in pos + 1..s {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }
    if cur.deg() > 0 {
        factors.push(cur.primitive());
    }
    factors.sort_by(cmp_poly);
    Ok(Factorization { factors, prime: p, subsets_tried: tried })
}

fn cmp_poly(a: &UPoly, b: &UPoly) -> std::cmp::Ordering {
    a.deg().cmp(&b.deg()).then_with(|| a.coeffs().cmp(b.coeffs()))
}

/// Good odd primes drawn deterministically from [lo, hi) for the fast mode.
pub fn random_good_primes(f: &UPoly, count: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < 10_000 {
        attempts += 1;
        let cand = rng.random_range(1_000u64..60_000);
        let p = if is_prime_u64(cand) { cand } else { next_prime(cand) };
        if !out.contains(&p) && is_good_prime(f, p) {
            out.push(p);
        }
    }
    out
}

/// Can `fine` be partitioned into groups whose sums are exactly the entries of `coarse`?
pub fn refines(fine: &[usize], coarse: &[usize]) -> bool {
    if fine.iter().sum::<usize>() != coarse.iter().sum::<usize>() {
        return false;
    }
    let mut parts: Vec<usize> = fine.to_vec();
    parts.sort_unstable_by(|a, b| b.cmp(a));
    let mut bins: Vec<usize> = coarse.to_vec();
    bins.sort_unstable_by(|a, b| b.cmp(a));
    fn place(i: usize, parts: &[usize], bins: &mut [usize]) -> bool {
        if i == parts.len() {
            return bins.iter().all(|&b| b == 0);
        }
        let mut seen = Vec::new();
        for b in 0..bins.len() {
            if bins[b] >= parts[i] && !seen.contains(&bins[b]) {
                seen.push(bins[b]);
                bins[b] -= parts[i];
                if place(i + 1, parts, bins) {
                    return true;
                }
                bins[b] += parts[i];
            }
        }
        false
    }
    place(0, &parts, &mut bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(c: &[i64]) -> UPoly {
        UPoly::from_i64(c)
    }

    fn degrees(f: &Factorization) -> Vec<usize> {
        f.factors.iter().map(|g| g.deg()).collect()
    }

    #[test]
    fn cyclotomic_split() {
        // z^6 - 1 = (z-1)(z+1)(z^2+z+1)(z^2-z+1)
        let f = p(&[-1, 0, 0, 0, 0, 0, 1]);
        let r = factor_squarefree(&f, SUBSET_CAP).unwrap();
        assert_eq!(r.factors, vec![p(&[-1, 1]), p(&[1, 1]), p(&[1, -1, 1]), p(&[1, 1, 1])]);
    }

    #[test]
    fn swinnerton_dyer_style_irreducible() {
        // z^4 - 10 z^2 + 1 is irreducible but splits mod every prime.
        let f = p(&[1, 0, -10, 0, 1]);
        let r = factor_squarefree(&f, SUBSET_CAP).unwrap();
        assert_eq!(r.factors, vec![f]);
    }

    #[test]
    fn non_monic_factors() {
        // (2z + 3)(3z^2 - z + 5)
        let f = p(&[3, 2]).mul(&p(&[5, -1, 3]));
        let r = factor_squarefree(&f, SUBSET_CAP).unwrap();
        assert_eq!(degrees(&r), vec![1, 2]);
        assert_eq!(r.factors[0], p(&[3, 2]));
        assert_eq!(r.factors[1], p(&[5, -1, 3]));
    }

    #[test]
    fn period_two_of_z2_minus_1() {
        // (z^2-1)^2 - 1 - z = z^4 - 2 z^2 - z = z (z+1)(z^2 - z - 1)
        let f = p(&[0, -1, -2, 0, 1]);
        let r = factor_squarefree(&f, SUBSET_CAP).unwrap();
        assert_eq!(r.factors, vec![p(&[0, 1]), p(&[1, 1]), p(&[-1, -1, 1])]);
    }

    #[test]
    fn ddf_profile_mod_p() {
        // z^2 + 1 splits mod 5, stays irreducible mod 7
        assert_eq!(factor_degrees_mod_p(&p(&[1, 0, 1]), 5), vec![1, 1]);
        assert_eq!(factor_degrees_mod_p(&p(&[1, 0, 1]), 7), vec![2]);
    }

    #[test]
    fn refinement_predicate() {
        assert!(refines(&[1, 1, 2], &[2, 2]));
        assert!(refines(&[1, 1, 1, 1], &[2, 2]));
        assert!(!refines(&[3, 1], &[2, 2]));
        assert!(refines(&[2, 2], &[4]));
    }

    #[test]
    fn subset_cap_is_enforced() {
        let f = p(&[1, 0, -10, 0, 1]);
        assert!(matches!(factor_squarefree(&f, 1), Err(Error::CapExceeded { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn product_of_random_factors_recovered(
            a in prop::collection::vec(-6i64..6, 2..4),
            b in prop::collection::vec(-6i64..6, 2..5),
            c in prop::collection::vec(-6i64..6, 2..4),
        ) {
            let f = p(&a).mul(&p(&b)).mul(&p(&c));
            prop_assume!(f.deg() >= 1);
            let sf = f.squarefree_part();
            prop_assume!(sf.deg() >= 1);
            let r = factor_squarefree(&sf, SUBSET_CAP).unwrap();
            // product of factors reproduces sf up to sign
            let prod = r.factors.iter().fold(p(&[1]), |acc, g| acc.mul(g));
            prop_assert_eq!(prod.primitive(), sf.primitive());
            // every factor is irreducible mod some check: profile mod p refines the degrees
            let degs: Vec<usize> = r.factors.iter().map(|g| g.deg()).collect();
            for q in random_good_primes(&sf, 3, 11) {
                prop_assert!(refines(&factor_degrees_mod_p(&sf, q), &degs));
            }
        }
    }
}
