//! Resultants and Bezout cofactors F R_i + G S_i = delta x^i over Z.
//!
//! Both routes are multimodular: the work happens in F_p[x] for a batch of
//! word-sized primes and the integer answer is rebuilt by CRT with balanced
//! residues. Coefficient bounds come from Hadamard's inequality applied to
//! the Sylvester matrix, whose minors give delta and (by Cramer's rule)
//! every coefficient of R_i and S_i.

use rug::Integer;

use crate::curve::Poly;
use crate::error::{Error, Result};
use crate::fp;

/// Cofactors for a coprime pair (F, G) with m = deg F, n = deg G.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BezoutData {
    pub delta: Integer,
    /// R_i for 0 <= i < m+n, each of degree < n.
    pub r: Vec<Poly>,
    /// S_i for 0 <= i < m+n, each of degree < m.
    pub s: Vec<Poly>,
}

/// The (m+n) x (m+n) Sylvester matrix, row-major: n shifted copies of F as
/// columns followed by m shifted copies of G, constant terms on top.
pub fn sylvester_matrix(f: &Poly, g: &Poly) -> Vec<Vec<Integer>> {
    let m = f.degree().expect("nonzero F");
    let n = g.degree().expect("nonzero G");
    let size = m + n;
    let mut t = vec![vec![Integer::new(); size]; size];
    for col in 0..n {
        for (k, c) in f.coeffs().iter().enumerate() {
            t[col + k][col] = c.clone();
        }
    }
    for col in 0..m {
        for (k, c) in g.coeffs().iter().enumerate() {
            t[col + k][n + col] = c.clone();
        }
    }
    t
}

/// log2 of the Hadamard bound (product of column Euclidean norms) of the
/// Sylvester matrix, rounded up. Bounds every minor of the matrix.
fn hadamard_bits(f: &Poly, g: &Poly) -> u64 {
    let m = f.degree().unwrap() as u64;
    let n = g.degree().unwrap() as u64;
    let sq_bits = |h: &Poly| -> u64 {
        let sq: Integer = h.coeffs().iter().map(|c| Integer::from(c * c)).sum();
        // sqrt(sq) < 2^{ceil(bits(sq)/2)}
        (sq.significant_bits() as u64).div_ceil(2)
    };
    n * sq_bits(f) + m * sq_bits(g)
}

/// Garner-style CRT accumulator producing balanced residues.
struct Crt {
    modulus: Integer,
}

impl Crt {
    fn new() -> Self {
        Crt { modulus: Integer::from(1) }
    }

    /// Fold residue r mod p into x (currently known mod self.modulus).
    fn lift(&self, x: &mut Integer, r: u64, p: u64) {
        let xm = fp::reduce(x, p);
        let jm = fp::reduce(&self.modulus, p);
        let k = fp::mul_mod(fp::sub_mod(r, xm, p), fp::inv_mod(jm, p).unwrap(), p);
        *x += Integer::from(&self.modulus * k);
    }

    fn advance(&mut self, p: u64) {
        self.modulus *= p;
    }

    fn balance(&self, x: &mut Integer) {
        let half = Integer::from(&self.modulus >> 1u32);
        if *x > half {
            *x -= &self.modulus;
        }
    }
}

fn det_mod(t: &[Vec<Integer>], p: u64) -> u64 {
    let n = t.len();
    let mut a: Vec<Vec<u64>> = t.iter().map(|row| row.iter().map(|c| fp::reduce(c, p)).collect()).collect();
    let mut det = 1u64;
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| a[r][col] != 0) else {
            return 0;
        };
        if pivot != col {
            a.swap(pivot, col);
            det = fp::sub_mod(0, det, p);
        }
        det = fp::mul_mod(det, a[col][col], p);
        let inv = fp::inv_mod(a[col][col], p).unwrap();
        for r in col + 1..n {
            if a[r][col] == 0 {
                continue;
            }
            let factor = fp::mul_mod(a[r][col], inv, p);
            for c in col..n {
                let sub = fp::mul_mod(factor, a[col][c], p);
                a[r][c] = fp::sub_mod(a[r][c], sub, p);
            }
        }
    }
    det
}

/// Determinant of the Sylvester matrix of (F, G).
pub fn sylvester_resultant(f: &Poly, g: &Poly) -> Integer {
    let t = sylvester_matrix(f, g);
    if t.is_empty() {
        return Integer::from(1);
    }
    let need = hadamard_bits(f, g) + 2;
    let mut crt = Crt::new();
    let mut det = Integer::new();
    let mut p = (1u64 << 62) - 1;
    let mut have = 0u64;
    while have < need {
        p -= 2;
        while !fp::is_prime(p) {
            p -= 2;
        }
        crt.lift(&mut det, det_mod(&t, p), p);
        crt.advance(p);
        have += 61;
    }
    crt.balance(&mut det);
    det
}

/// Bezout cofactors following the small-prime CRT construction.
pub fn bezout_cofactors(f: &Poly, g: &Poly) -> Result<BezoutData> {
    let delta = sylvester_resultant(f, g);
    if delta == 0 {
        return Err(Error::NotCoprime);
    }
    let beta = initial_beta(f, g, &delta);
    Ok(cofactors_from(f, g, delta, beta))
}

/// Same as [`bezout_cofactors`] but starting from an explicit prime bound.
#[doc(hidden)]
pub fn bezout_cofactors_with_beta(f: &Poly, g: &Poly, beta: u64) -> Result<BezoutData> {
    let delta = sylvester_resultant(f, g);
    if delta == 0 {
        return Err(Error::NotCoprime);
    }
    Ok(cofactors_from(f, g, delta, beta))
}

/// Doubles beta until the good primes below it carry enough bits.
fn cofactors_from(f: &Poly, g: &Poly, delta: Integer, mut beta: u64) -> BezoutData {
    loop {
        if let Some(data) = cofactors_below(f, g, &delta, beta) {
            return data;
        }
        beta *= 2;
    }
}

/// Smallest power of two exceeding the coefficient bound plus
/// log(|delta| |F| |G|) + 2, all in natural-log units.
fn initial_beta(f: &Poly, g: &Poly, delta: &Integer) -> u64 {
    let ln2 = std::f64::consts::LN_2;
    let bound = hadamard_bits(f, g) as f64 * ln2;
    let bad = Integer::from(delta.abs_ref()) * f.norm() * g.norm();
    let extra = bad.significant_bits() as f64 * ln2;
    let target = (bound + extra + 2.0).ceil() as u64;
    (target + 1).next_power_of_two()
}

fn cofactors_below(f: &Poly, g: &Poly, delta: &Integer, beta: u64) -> Option<BezoutData> {
    let m = f.degree().unwrap();
    let n = g.degree().unwrap();
    let lf = f.leading().unwrap();
    let lg = g.leading().unwrap();
    let good: Vec<u64> =
        (2..beta).filter(|&p| fp::is_prime(p)).filter(|&p| [delta, lf, lg].iter().all(|c| fp::reduce(c, p) != 0)).collect();
    let bits: f64 = good.iter().map(|&p| (p as f64).log2()).sum();
    if bits < (hadamard_bits(f, g) + 2) as f64 {
        return None;
    }

    let count = m + n;
    let mut r_acc = vec![vec![Integer::new(); n]; count];
    let mut s_acc = vec![vec![Integer::new(); m]; count];
    let mut crt = Crt::new();
    for &p in &good {
        let (rs, ss) = cofactors_mod(f, g, delta, p);
        for i in 0..count {
            for k in 0..n {
                crt.lift(&mut r_acc[i][k], *rs[i].get(k).unwrap_or(&0), p);
            }
            for k in 0..m {
                crt.lift(&mut s_acc[i][k], *ss[i].get(k).unwrap_or(&0), p);
            }
        }
        crt.advance(p);
    }
    let finish = |acc: Vec<Vec<Integer>>| -> Vec<Poly> {
        acc.into_iter()
            .map(|mut coeffs| {
                coeffs.iter_mut().for_each(|c| crt.balance(c));
                Poly::new(coeffs)
            })
            .collect()
    };
    Some(BezoutData { delta: delta.clone(), r: finish(r_acc), s: finish(s_acc) })
}

/// R_i, S_i mod p: solve the i = 0 case by extended gcd, then shift.
fn cofactors_mod(f: &Poly, g: &Poly, delta: &Integer, p: u64) -> (Vec<Vec<u64>>, Vec<Vec<u64>>) {
    let fm = fp::poly_from_integers(f.coeffs(), p);
    let gm = fp::poly_from_integers(g.coeffs(), p);
    let d = fp::reduce(delta, p);
    let (gcd, u, _) = fp::poly_xgcd(&fm, &gm, p);
    debug_assert_eq!(gcd, vec![1]);
    let r0 = fp::poly_rem(&fp::poly_scale(&u, d, p), &gm, p);
    let rest = fp::poly_sub(&[d], &fp::poly_mul(&fm, &r0, p), p);
    let (s0, zero) = fp::poly_divrem(&rest, &gm, p);
    debug_assert!(zero.is_empty());

    let count = fm.len() + gm.len() - 2;
    let mut rs = Vec::with_capacity(count);
    let mut ss = Vec::with_capacity(count);
    rs.push(r0);
    ss.push(s0);
    for i in 1..count {
        let xr: Vec<u64> = std::iter::once(0).chain(rs[i - 1].iter().copied()).collect();
        let xs: Vec<u64> = std::iter::once(0).chain(ss[i - 1].iter().copied()).collect();
        rs.push(fp::poly_rem(&fp::trim(xr), &gm, p));
        ss.push(fp::poly_rem(&fp::trim(xs), &fm, p));
    }
    (rs, ss)
}
