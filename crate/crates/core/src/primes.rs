//! Primality tests and integer factorization for resultants.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'outer: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Smallest prime strictly greater than n.
pub fn next_prime(n: u64) -> u64 {
    let mut k = n + 1;
    while !is_prime_u64(k) {
        k += 1;
    }
    k
}

/// Probabilistic primality for big integers (Miller-Rabin, 32 fixed-seed bases).
pub fn is_probable_prime(n: &BigUint) -> bool {
    if let Some(v) = n.to_u64() {
        return is_prime_u64(v);
    }
    if n.is_even() {
        return false;
    }
    let one = BigUint::one();
    let nm1 = n - &one;
    let mut d = nm1.clone();
    let mut s = 0;
    while d.is_even() {
        d >>= 1;
        s += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_9e1a);
    let two = BigUint::from(2u32);
    'outer: for _ in 0..32 {
        let a = random_in(&mut rng, &two, &nm1);
        let mut x = a.modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == nm1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Uniform-ish integer in [lo, hi) from 64 extra random bits, good enough for witnesses.
fn random_in(rng: &mut ChaCha8Rng, lo: &BigUint, hi: &BigUint) -> BigUint {
    let span = hi - lo;
    let words = (span.bits() / 32 + 3) as usize;
    let digits: Vec<u32> = (0..words).map(|_| rng.random::<u32>()).collect();
    lo + BigUint::new(digits) % span
}

fn pollard_brent(n: &BigUint, seed: u64) -> Option<BigUint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let one = BigUint::one();
    let c = random_in(&mut rng, &one, n);
    let mut y = random_in(&mut rng, &one, n);
    let m = 128u32;
    let mut g = one.clone();
    let mut r = 1u64;
    let mut q = one.clone();
    let mut x = y.clone();
    let mut ys = y.clone();
    let f = |v: &BigUint| (v * v + &c) % n;
    let absdiff = |a: &BigUint, b: &BigUint| if a > b { a - b } else { b - a };
    let mut rounds = 0u64;
    while g == one {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g == one {
            ys = y.clone();
            for _ in 0..(m as u64).min(r - k) {
                y = f(&y);
                q = (q * absdiff(&x, &y)) % n;
            }
            g = q.gcd(n);
            k += m as u64;
        }
        r *= 2;
        rounds += 1;
        if rounds > 40 {
            return None;
        }
    }
    if &g == n {
        loop {
            ys = f(&ys);
            g = absdiff(&x, &ys).gcd(n);
            if g != one {
                break;
            }
        }
    }
    if &g == n {
        None
    } else {
        Some(g)
    }
}

/// Prime factorization (ascending primes with exponents) of a positive integer.
pub fn factorize(n: &BigUint) -> Vec<(BigUint, u32)> {
    let mut out: Vec<(BigUint, u32)> = Vec::new();
    if n.is_zero() {
        return out;
    }
    let mut m = n.clone();
    let mut p = 2u64;
    while p < 100_000 {
        let bp = BigUint::from(p);
        if &bp * &bp > m {
            break;
        }
        let mut e = 0;
        while (&m % &bp).is_zero() {
            m /= &bp;
            e += 1;
        }
        if e > 0 {
            out.push((bp, e));
        }
        p = if p == 2 { 3 } else { p + 2 };
    }
    let mut stack = vec![m];
    let mut big: Vec<BigUint> = Vec::new();
    while let Some(k) = stack.pop() {
        if k.is_one() {
            continue;
        }
        if is_probable_prime(&k) {
            big.push(k);
            continue;
        }
        let mut seed = 1u64;
        let d = loop {
            if let Some(d) = pollard_brent(&k, seed) {
                break d;
            }
            seed += 1;
        };
        stack.push(&k / &d);
        stack.push(d);
    }
    big.sort();
    for q in big {
        match out.last_mut() {
            Some((last, e)) if *last == q => *e += 1,
            _ => out.push((q, 1)),
        }
    }
    out.sort();
    out
}
