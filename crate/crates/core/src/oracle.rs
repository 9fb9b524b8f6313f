//! Brute-force ground truth.
//!
//! Naive point counting over F_{p^n}, the L-polynomial from counts, direct
//! modular products, and exact rational reductions. Also the small-prime
//! fallback of the pipeline.

use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::curve::{poly_pow_coeffs, Curve};
use crate::error::{Error, Result};
use crate::fp::{self, add_mod, mul_mod, sub_mod};
use crate::frobenius::{alpha_rationals, precision_mu, rational_mod};
use crate::matrix::{IntMatrix, ModMatrix};
use crate::reduction::{admissible_pairs, rational_reduce, reduction_path, AdmissiblePair, DifferentialVector, Reducer};
use crate::zeta::{LPolyRecord, Status};

/// Largest extension degree supported by [`FiniteField`].
pub const MAX_EXT: usize = 8;

/// Default cap on p^n for point counting, in bits.
pub const DEFAULT_BUDGET_BITS: u32 = 25;

/// Largest p accepted by [`exact_u`].
pub const EXACT_U_MAX_P: u64 = 211;

/// Element of F_{p^n}: coefficients of a polynomial of degree < n.
pub type Elem = [u64; MAX_EXT];

/// F_{p^n} = F_p[x]/(f), f the smallest irreducible monic of degree n when
/// monics are ordered by their coefficient vectors read from the top.
#[derive(Clone, Debug)]
pub struct FiniteField {
    p: u64,
    n: usize,
    /// f = x^n - sum reduction[i] x^i
    reduction: Vec<u64>,
    modulus: Vec<u64>,
    /// images of x^{p^k} for the Frobenius powers, as matrices over F_p
    frobenius: Vec<Vec<Elem>>,
}

impl FiniteField {
    pub fn new(p: u64, n: usize) -> Self {
        assert!((1..=MAX_EXT).contains(&n), "extension degree out of range");
        assert!(fp::is_prime(p), "characteristic must be prime");
        let modulus = smallest_irreducible(p, n);
        let reduction = modulus[..n].iter().map(|&c| sub_mod(0, c, p)).collect();
        let mut field = FiniteField { p, n, reduction, modulus, frobenius: Vec::new() };
        // Column k of the Frobenius matrix is (x^k)^p.
        let frob: Vec<Elem> = (0..n).map(|k| field.pow(&field.monomial(k), p as u128)).collect();
        let mut powers = vec![frob.clone()];
        for _ in 2..n {
            let prev = powers.last().unwrap();
            powers.push(frob.iter().map(|col| field.apply_linear(prev, col)).collect());
        }
        field.frobenius = powers;
        field
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn order(&self) -> u128 {
        (self.p as u128).pow(self.n as u32)
    }

    pub fn zero(&self) -> Elem {
        [0; MAX_EXT]
    }

    pub fn one(&self) -> Elem {
        self.from_u64(1)
    }

    pub fn from_u64(&self, c: u64) -> Elem {
        let mut e = self.zero();
        e[0] = c % self.p;
        e
    }

    fn monomial(&self, k: usize) -> Elem {
        let mut e = [0u64; MAX_EXT];
        if k < self.n {
            e[k] = 1;
            e
        } else {
            let x = {
                let mut x = [0u64; MAX_EXT];
                if self.n == 1 {
                    x[0] = self.reduction[0];
                } else {
                    x[1] = 1;
                }
                x
            };
            self.pow(&x, k as u128)
        }
    }

    /// The idx-th element in base-p digit order.
    pub fn element(&self, mut idx: u128) -> Elem {
        let mut e = self.zero();
        for c in e.iter_mut().take(self.n) {
            *c = (idx % self.p as u128) as u64;
            idx /= self.p as u128;
        }
        e
    }

    pub fn is_zero(&self, a: &Elem) -> bool {
        a[..self.n].iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        let mut out = self.zero();
        for i in 0..self.n {
            out[i] = add_mod(a[i], b[i], self.p);
        }
        out
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        let mut out = self.zero();
        for i in 0..self.n {
            out[i] = sub_mod(a[i], b[i], self.p);
        }
        out
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        let (n, p) = (self.n, self.p);
        let mut prod = [0u128; 2 * MAX_EXT];
        for i in 0..n {
            if a[i] == 0 {
                continue;
            }
            for j in 0..n {
                prod[i + j] = (prod[i + j] + a[i] as u128 * b[j] as u128) % p as u128;
            }
        }
        // x^n = sum reduction[i] x^i
        for k in (n..2 * n - 1).rev() {
            let c = prod[k] as u64;
            if c == 0 {
                continue;
            }
            for i in 0..n {
                prod[k - n + i] = (prod[k - n + i] + mul_mod(c, self.reduction[i], p) as u128) % p as u128;
            }
        }
        let mut out = self.zero();
        for i in 0..n {
            out[i] = prod[i] as u64;
        }
        out
    }

    pub fn pow(&self, a: &Elem, mut e: u128) -> Elem {
        let mut acc = self.one();
        let mut base = *a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    fn apply_linear(&self, cols: &[Elem], v: &Elem) -> Elem {
        let mut out = self.zero();
        for (k, col) in cols.iter().enumerate() {
            if v[k] == 0 {
                continue;
            }
            for i in 0..self.n {
                out[i] = add_mod(out[i], mul_mod(v[k], col[i], self.p), self.p);
            }
        }
        out
    }

    /// a^{p^k} for 1 <= k < n.
    pub fn frobenius(&self, a: &Elem, k: usize) -> Elem {
        self.apply_linear(&self.frobenius[k - 1], a)
    }

    /// Norm to F_p: the product of the conjugates.
    pub fn norm(&self, a: &Elem) -> u64 {
        let mut acc = *a;
        for k in 1..self.n {
            acc = self.mul(&acc, &self.frobenius(a, k));
        }
        debug_assert!(acc[1..self.n].iter().all(|&c| c == 0));
        acc[0]
    }

    /// Quadratic character in {-1, 0, 1}, via chi(N(a)) over F_p.
    pub fn chi(&self, a: &Elem) -> i32 {
        let n = self.norm(a);
        if n == 0 {
            return 0;
        }
        if fp::pow_mod(n, (self.p - 1) / 2, self.p) == 1 {
            1
        } else {
            -1
        }
    }
}

fn smallest_irreducible(p: u64, n: usize) -> Vec<u64> {
    // Enumerate x^n + c_{n-1} x^{n-1} + ... + c_0 with (c_{n-1}, ..., c_0)
    // increasing lexicographically.
    let total = (p as u128).pow(n as u32);
    for idx in 0..total {
        let mut f = vec![0u64; n + 1];
        let mut rest = idx;
        for i in 0..n {
            f[i] = (rest % p as u128) as u64;
            rest /= p as u128;
        }
        f[n] = 1;
        if fp::is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

fn check_budget(p: u64, n: u32, bits: u32) -> Result<()> {
    let size = Integer::from(p).pow(n);
    if size.significant_bits() > bits {
        return Err(Error::BudgetExceeded { p, n, bits });
    }
    Ok(())
}

/// #X(F_{p^n}), counting the single point at infinity.
pub fn point_count(curve: &Curve, p: u64, n: usize, budget_bits: u32) -> Result<Integer> {
    check_budget(p, n as u32, budget_bits)?;
    let field = FiniteField::new(p, n);
    let q: Vec<Elem> = curve.q().coeffs().iter().map(|c| field.from_u64(fp::reduce(c, p))).collect();
    let mut total: i128 = 1;
    for idx in 0..field.order() {
        let x = field.element(idx);
        let mut v = field.zero();
        for c in q.iter().rev() {
            v = field.add(&field.mul(&v, &x), c);
        }
        total += 1 + field.chi(&v) as i128;
    }
    Ok(Integer::from(total))
}

/// L-polynomial from N_1..N_g.
pub fn lpoly_from_counts(p: u64, g: usize, counts: &[Integer]) -> Result<LPolyRecord> {
    assert_eq!(counts.len(), g, "need counts over F_p, ..., F_(p^g)");
    let pz = Integer::from(p);
    let s: Vec<Integer> = counts.iter().enumerate().map(|(i, n)| pz.clone().pow(i as u32 + 1) + 1u32 - n).collect();
    let mut e = vec![Integer::from(1)];
    for k in 1..=g {
        let mut sum = Integer::new();
        for i in 1..=k {
            let term = Integer::from(&e[k - i] * &s[i - 1]);
            if i % 2 == 1 {
                sum += term;
            } else {
                sum -= term;
            }
        }
        if !sum.is_divisible_u(k as u32) {
            return Err(Error::NonIntegralNewton(p));
        }
        e.push(sum.div_exact_u(k as u32));
    }
    let mut a = vec![Integer::new(); 2 * g + 1];
    for i in 0..=g {
        a[i] = if i % 2 == 1 { -e[i].clone() } else { e[i].clone() };
    }
    for i in 0..g {
        a[2 * g - i] = pz.clone().pow((g - i) as u32) * &a[i];
    }
    Ok(LPolyRecord { p, status: Status::Fallback, a })
}

/// M_0 M_1 ... M_{k_max} mod p^lambda, reducing after every product.
pub fn direct_mod_product(ms: &[IntMatrix], p: u64, k_max: usize, lambda: u32) -> ModMatrix {
    let modulus = Integer::from(p).pow(lambda);
    let mut acc = ModMatrix::new(&ms[0], modulus.clone());
    for m in &ms[1..=k_max] {
        acc = acc.mul(&ModMatrix::new(m, modulus.clone()));
    }
    acc
}

/// Exact reduction of x^{pa-1} y^{-pb+1} dx/y to W[-1,0].
pub fn exact_u(reducer: &Reducer, pair: AdmissiblePair, p: u64) -> Result<DifferentialVector> {
    if p > EXACT_U_MAX_P {
        return Err(Error::ExactReductionTooLarge { p, limit: EXACT_U_MAX_P });
    }
    let s = (pair.a as u64 * p - 1) as i64;
    let t = ((pair.b as u64 * p - 1) / 2) as i64;
    let start = DifferentialVector::basis(s, t, reducer.dim, 0);
    rational_reduce(reducer, &start, &reduction_path(pair, p))
}

/// Frobenius matrix mod p^mu assembled from exact reductions.
pub fn exact_frobenius(curve: &Curve, p: u64) -> Result<ModMatrix> {
    let g = curve.genus();
    let mu = precision_mu(g);
    let reducer = Reducer::new(curve)?;
    let alpha = alpha_rationals(mu);
    let c_table = poly_pow_coeffs(curve, mu);
    let modulus = Integer::from(p).pow(mu as u32);
    let pairs = admissible_pairs(g, mu, curve.c0());
    let mut us = std::collections::BTreeMap::new();
    for pair in pairs {
        us.insert(pair, exact_u(&reducer, pair, p)?);
    }
    let mut rows = vec![vec![Integer::new(); 2 * g]; 2 * g];
    for i in 0..2 * g {
        let mut acc = vec![Rational::new(); 2 * g + 1];
        for (j, cj) in c_table.iter().enumerate() {
            for (r, c) in cj.iter().enumerate() {
                if *c == 0 {
                    continue;
                }
                let pair = AdmissiblePair::new((i + r + 1) as u32, 2 * j as u32 + 1);
                let u = us.get(&pair).ok_or(Error::MissingEntry { p, a: pair.a, b: pair.b })?;
                let scale = Rational::from(&alpha[j] * c) * p;
                for (x, y) in acc.iter_mut().zip(&u.coords) {
                    *x += Rational::from(&scale * y);
                }
            }
        }
        for (k, x) in acc.iter().enumerate().skip(1) {
            if x.denom().is_divisible(&Integer::from(p)) {
                return Err(Error::IntegralityFailure { p, column: i });
            }
            rows[k - 1][i] = rational_mod(x, &modulus, p)?;
        }
    }
    Ok(ModMatrix::new(&IntMatrix::from_rows(rows), modulus))
}

/// L-polynomial by brute-force counting over F_p, ..., F_{p^g}.
pub fn fallback_lpoly(curve: &Curve, p: u64, budget_bits: u32) -> Result<LPolyRecord> {
    let g = curve.genus();
    check_budget(p, g as u32, budget_bits)?;
    let counts = (1..=g).map(|n| point_count(curve, p, n, budget_bits)).collect::<Result<Vec<_>>>()?;
    lpoly_from_counts(p, g, &counts)
}
