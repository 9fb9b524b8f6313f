//! Word-sized arithmetic in F_p and F_p[x].
//!
//! Polynomials are ascending coefficient vectors with no trailing zeros.

use rug::ops::RemRounding;
use rug::Integer;

#[inline]
pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % p as u128) as u64
}

#[inline]
pub fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        p - (b - a)
    }
}

pub fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse modulo a prime; `None` for zero.
pub fn inv_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        None
    } else {
        Some(pow_mod(a, p - 2, p))
    }
}

/// Canonical residue of a big integer.
pub fn reduce(n: &Integer, p: u64) -> u64 {
    let m = Integer::from(p);
    let r = Integer::from(n.rem_euc(&m));
    r.to_u64().expect("residue fits a word")
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    // deterministic Miller-Rabin for 64-bit inputs
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn trim(mut f: Vec<u64>) -> Vec<u64> {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

pub fn poly_from_integers(coeffs: &[Integer], p: u64) -> Vec<u64> {
    trim(coeffs.iter().map(|c| reduce(c, p)).collect())
}

pub fn poly_add(f: &[u64], g: &[u64], p: u64) -> Vec<u64> {
    let n = f.len().max(g.len());
    trim((0..n).map(|i| add_mod(*f.get(i).unwrap_or(&0), *g.get(i).unwrap_or(&0), p)).collect())
}

pub fn poly_sub(f: &[u64], g: &[u64], p: u64) -> Vec<u64> {
    let n = f.len().max(g.len());
    trim((0..n).map(|i| sub_mod(*f.get(i).unwrap_or(&0), *g.get(i).unwrap_or(&0), p)).collect())
}

pub fn poly_scale(f: &[u64], k: u64, p: u64) -> Vec<u64> {
    trim(f.iter().map(|&c| mul_mod(c, k, p)).collect())
}

pub fn poly_mul(f: &[u64], g: &[u64], p: u64) -> Vec<u64> {
    if f.is_empty() || g.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; f.len() + g.len() - 1];
    for (i, &a) in f.iter().enumerate() {
        if a == 0 {
            continue;
        }
        for (j, &b) in g.iter().enumerate() {
            out[i + j] = add_mod(out[i + j], mul_mod(a, b, p), p);
        }
    }
    trim(out)
}

/// Quotient and remainder; `g` must be nonzero with invertible leading term.
pub fn poly_divrem(f: &[u64], g: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    assert!(!g.is_empty(), "division by zero polynomial");
    let lead_inv = inv_mod(*g.last().unwrap(), p).expect("leading coefficient invertible");
    let mut rem = f.to_vec();
    if rem.len() < g.len() {
        return (Vec::new(), trim(rem));
    }
    let mut quot = vec![0u64; rem.len() - g.len() + 1];
    for k in (0..quot.len()).rev() {
        let c = mul_mod(rem[k + g.len() - 1], lead_inv, p);
        quot[k] = c;
        if c == 0 {
            continue;
        }
        for (j, &b) in g.iter().enumerate() {
            rem[k + j] = sub_mod(rem[k + j], mul_mod(c, b, p), p);
        }
    }
    rem.truncate(g.len() - 1);
    (trim(quot), trim(rem))
}

pub fn poly_rem(f: &[u64], g: &[u64], p: u64) -> Vec<u64> {
    poly_divrem(f, g, p).1
}

/// Monic gcd.
pub fn poly_gcd(f: &[u64], g: &[u64], p: u64) -> Vec<u64> {
    let (mut a, mut b) = (trim(f.to_vec()), trim(g.to_vec()));
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    match a.last() {
        Some(&lead) => poly_scale(&a, inv_mod(lead, p).unwrap(), p),
        None => a,
    }
}

/// Returns (g, u, v) with u f + v g' = g monic gcd.
pub fn poly_xgcd(f: &[u64], g: &[u64], p: u64) -> (Vec<u64>, Vec<u64>, Vec<u64>) {
    let (mut r0, mut r1) = (trim(f.to_vec()), trim(g.to_vec()));
    let (mut u0, mut u1) = (vec![1u64], Vec::new());
    let (mut v0, mut v1) = (Vec::new(), vec![1u64]);
    while !r1.is_empty() {
        let (q, r) = poly_divrem(&r0, &r1, p);
        let u2 = poly_sub(&u0, &poly_mul(&q, &u1, p), p);
        let v2 = poly_sub(&v0, &poly_mul(&q, &v1, p), p);
        r0 = std::mem::replace(&mut r1, r);
        u0 = std::mem::replace(&mut u1, u2);
        v0 = std::mem::replace(&mut v1, v2);
    }
    let lead = *r0.last().expect("inputs not both zero");
    let k = inv_mod(lead, p).unwrap();
    (poly_scale(&r0, k, p), poly_scale(&u0, k, p), poly_scale(&v0, k, p))
}

/// f^e mod m.
pub fn poly_powmod(f: &[u64], mut e: u128, m: &[u64], p: u64) -> Vec<u64> {
    let mut acc = poly_rem(&[1], m, p);
    let mut base = poly_rem(f, m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_rem(&poly_mul(&acc, &base, p), m, p);
        }
        base = poly_rem(&poly_mul(&base, &base, p), m, p);
        e >>= 1;
    }
    acc
}

/// Rabin's irreducibility test for a monic polynomial of degree n >= 1.
pub fn is_irreducible(f: &[u64], p: u64) -> bool {
    let n = match f.len().checked_sub(1) {
        Some(n) if n >= 1 => n,
        _ => return false,
    };
    let x = vec![0u64, 1];
    // x^{p^k} mod f for k = 0..=n
    let mut frob = vec![poly_rem(&x, f, p)];
    for k in 1..=n {
        let next = poly_powmod(&frob[k - 1], p as u128, f, p);
        frob.push(next);
    }
    if poly_sub(&frob[n], &frob[0], p) != Vec::<u64>::new() {
        return false;
    }
    let mut m = n;
    let mut q = 2;
    let mut prime_factors = Vec::new();
    while q * q <= m {
        if m % q == 0 {
            prime_factors.push(q);
            while m % q == 0 {
                m /= q;
            }
        }
        q += 1;
    }
    if m > 1 {
        prime_factors.push(m);
    }
    prime_factors.into_iter().all(|q| {
        let h = poly_sub(&frob[n / q], &frob[0], p);
        poly_gcd(f, &h, p).len() == 1
    })
}
