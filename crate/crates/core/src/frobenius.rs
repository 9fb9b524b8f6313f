//! Frobenius matrices mod p^mu for all primes in a range.
//!
//! For each admissible pair (a,b) one remainder tree yields, for every prime
//! p at once, the reduction U_p^{a,b} of x^{pa-1} y^{-pb+1} dx/y. Column i of
//! the Frobenius matrix is then a fixed combination of these reductions.

use std::collections::BTreeMap;

use rayon::prelude::*;
use rug::ops::{Pow, RemRounding, RemRoundingAssign};
use rug::Complete;
use rug::{Integer, Rational};

use crate::curve::{poly_pow_coeffs, Curve};
use crate::error::{Error, Result};
use crate::matrix::{IntMatrix, ModMatrix};
use crate::reduction::{admissible_pairs, final_reduction_matrix, AdmissiblePair, Reducer, ZeroStepPoly};
use crate::rtree::ModuliTree;

/// Smallest mu with 3^{2 mu} >= 3^g 2^{2(2g+1)}.
pub fn precision_mu(g: usize) -> usize {
    let target = Integer::from(3u32).pow(g as u32) << (2 * (2 * g + 1)) as u32;
    (0..).find(|&mu| Integer::from(3u32).pow(2 * mu as u32) >= target).unwrap()
}

pub fn rho_bound(pair: AdmissiblePair) -> u32 {
    pair.rho()
}

/// Primes at or below this bound go to brute-force counting.
pub fn small_prime_cutoff(g: usize, mu: usize) -> u64 {
    ((2 * g + 1) * (4 * mu - 1)) as u64
}

/// alpha_j = sum_{k=j}^{mu-1} (-1)^{j+k} binom(-1/2, k) binom(k, j), exactly.
pub fn alpha_rationals(mu: usize) -> Vec<Rational> {
    let mut half_binom = Vec::with_capacity(mu);
    let mut c = Rational::from(1);
    for k in 0..mu {
        half_binom.push(c.clone());
        c *= Rational::from((-1 - 2 * k as i64, 2 * (k as i64 + 1)));
    }
    (0..mu)
        .map(|j| {
            let mut sum = Rational::new();
            for (k, hb) in half_binom.iter().enumerate().skip(j) {
                let term = Rational::from(hb * Integer::binomial_u(k as u32, j as u32).complete());
                if (j + k) % 2 == 0 {
                    sum += term;
                } else {
                    sum -= term;
                }
            }
            sum
        })
        .collect()
}

/// Reduce a rational modulo m, where m is a power of p.
pub(crate) fn rational_mod(q: &Rational, m: &Integer, p: u64) -> Result<Integer> {
    let inv = q.denom().clone().invert(m).map_err(|_| Error::NonInvertibleDenominator(p))?;
    Ok((inv * q.numer()).rem_euc(m))
}

/// alpha_0, ..., alpha_{mu-1} modulo `modulus`, a power of the odd prime p.
pub fn alpha_coeffs(mu: usize, modulus: &Integer, p: u64) -> Result<Vec<Integer>> {
    alpha_rationals(mu).iter().map(|a| rational_mod(a, modulus, p)).collect()
}

/// Reduction of x^{pa-1} y^{-pb+1} dx/y, scaled: U = p^{-e} coords.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UEntry {
    pub pair: AdmissiblePair,
    pub p: u64,
    /// Residues mod p^{mu + rho}; coords[0] = 0.
    pub coords: Vec<Integer>,
    pub e: u32,
    pub rho: u32,
}

pub type UTable = BTreeMap<(u64, AdmissiblePair), UEntry>;

/// Per-curve constants shared by every prime.
#[derive(Clone, Debug)]
pub struct FrobContext {
    pub curve: Curve,
    pub reducer: Reducer,
    pub mu: usize,
    pub cutoff: u64,
    pub pairs: Vec<AdmissiblePair>,
    /// coefficient of x^r in Q^j
    pub c_table: Vec<Vec<Integer>>,
    pub alpha: Vec<Rational>,
}

impl FrobContext {
    pub fn new(curve: &Curve) -> Result<Self> {
        let g = curve.genus();
        let mu = precision_mu(g);
        Ok(FrobContext {
            curve: curve.clone(),
            reducer: Reducer::new(curve)?,
            mu,
            cutoff: small_prime_cutoff(g, mu),
            pairs: admissible_pairs(g, mu, curve.c0()),
            c_table: poly_pow_coeffs(curve, mu),
            alpha: alpha_rationals(mu),
        })
    }

    pub fn genus(&self) -> usize {
        self.curve.genus()
    }

    pub fn rho_max(&self) -> u32 {
        self.pairs.iter().map(|p| p.rho()).max().unwrap_or(0)
    }

    /// Primes handled by the remainder trees: good, above the cutoff, and
    /// not dividing a nonzero c0.
    pub fn in_main_range(&self, p: u64) -> bool {
        let c0 = self.curve.c0();
        self.curve.is_good_prime(p) && p > self.cutoff && (*c0 == 0 || !c0.is_divisible(&Integer::from(p)))
    }
}

/// Run the remainder trees for every pair and collect U-values for `primes`.
///
/// The tree length is B = ceil(n/2), enough for every prime below n.
pub fn compute_u_table(ctx: &FrobContext, primes: &[u64], n: u64) -> Result<UTable> {
    let len = n.div_ceil(2).max(2) as usize;
    let mut table = UTable::new();
    if primes.is_empty() {
        return Ok(table);
    }
    // Moduli trees depend only on lambda, which repeats across pairs.
    let mut trees: BTreeMap<u32, ModuliTree> = BTreeMap::new();
    for &pair in &ctx.pairs {
        let lambda = ctx.mu as u32 + pair.rho();
        for l in [lambda, lambda + pair.rho()] {
            if let std::collections::btree_map::Entry::Vacant(v) = trees.entry(l) {
                v.insert(ModuliTree::new(len, primes, l)?);
            }
        }
        for entry in u_values_for_pair(ctx, pair, &trees)? {
            table.insert((entry.p, pair), entry);
        }
    }
    Ok(table)
}

fn u_values_for_pair(ctx: &FrobContext, pair: AdmissiblePair, trees: &BTreeMap<u32, ModuliTree>) -> Result<Vec<UEntry>> {
    let rho = pair.rho();
    let lambda = ctx.mu as u32 + rho;
    // The unit part of the denominator must be known to lambda digits after
    // removing up to rho factors of p.
    let lambda_d = lambda + rho;
    let poly = ZeroStepPoly::new(&ctx.reducer, pair)?.cancel_common_factors();
    let (m0, d0) = final_reduction_matrix(&ctx.reducer, pair)?;

    let m_leaf = |k: usize| if k == 0 { m0.clone() } else { poly.matrix_at(k as u64) };
    let d_leaf = |k: usize| IntMatrix::scalar(if k == 0 { d0.clone() } else { poly.denominator_at(k as u64) });
    let ms = trees[&lambda].run(ctx.reducer.dim, &m_leaf);
    let ds = trees[&lambda_d].run(1, &d_leaf);

    ms.par_iter().map(|(&p, m)| u_entry(pair, p, m, ds[&p].get(0, 0), ctx.mu as u32)).collect()
}

/// Divide the first column of the matrix leaf by the denominator leaf.
fn u_entry(pair: AdmissiblePair, p: u64, m: &ModMatrix, d: &Integer, mu: u32) -> Result<UEntry> {
    let rho = pair.rho();
    let lambda = mu + rho;
    let pz = Integer::from(p);
    if *d == 0 {
        return Err(Error::ValuationOverflow { p, a: pair.a, b: pair.b, e: lambda + rho, rho });
    }
    let mut unit = d.clone();
    let e = unit.remove_factor_mut(&pz);
    if e > rho {
        return Err(Error::ValuationOverflow { p, a: pair.a, b: pair.b, e, rho });
    }
    let modulus = pz.clone().pow(lambda);
    debug_assert_eq!(m.modulus(), &modulus);
    let inv = unit.invert(&modulus).expect("unit is prime to p");
    // The unit is known to lambda + rho - e >= lambda digits and the column
    // to lambda digits, so U = p^{-e} coords is known to lambda - e >= mu.
    let precision = lambda - e;
    if precision < mu {
        return Err(Error::PrecisionLoss { p, a: pair.a, b: pair.b, precision, needed: mu });
    }
    let coords: Vec<Integer> = m.matrix().column(0).into_iter().map(|c| (c * &inv).rem_euc(&modulus)).collect();
    debug_assert_eq!(coords[0], 0);
    Ok(UEntry { pair, p, coords, e, rho })
}

/// Frobenius matrix on the basis x^i dx/y, 0 <= i < 2g, modulo p^mu.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobMatrix {
    pub p: u64,
    pub matrix: ModMatrix,
}

impl FrobMatrix {
    pub fn trace(&self) -> Integer {
        self.matrix.trace()
    }
}

/// Combine U-values into the Frobenius matrix at p.
pub fn assemble_frobenius(ctx: &FrobContext, p: u64, table: &UTable) -> Result<FrobMatrix> {
    let g = ctx.genus();
    let mu = ctx.mu as u32;
    let rho_star = ctx.rho_max();
    let pz = Integer::from(p);
    let work = pz.clone().pow(mu + rho_star);
    let alpha = ctx.alpha.iter().map(|a| rational_mod(a, &work, p)).collect::<Result<Vec<_>>>()?;
    let out_mod = pz.clone().pow(mu);
    let shift = pz.clone().pow(rho_star);
    let mut cols = Vec::with_capacity(2 * g);
    for i in 0..2 * g {
        let mut acc = vec![Integer::new(); 2 * g + 1];
        for (j, cj) in ctx.c_table.iter().enumerate() {
            for (r, c) in cj.iter().enumerate() {
                if *c == 0 {
                    continue;
                }
                let pair = AdmissiblePair::new((i + r + 1) as u32, 2 * j as u32 + 1);
                let entry = table.get(&(p, pair)).ok_or(Error::MissingEntry { p, a: pair.a, b: pair.b })?;
                let scale = (Integer::from(&alpha[j] * c) * pz.clone().pow(1 + rho_star - entry.e)).rem_euc(&work);
                for (x, u) in acc.iter_mut().zip(&entry.coords) {
                    *x += Integer::from(&scale * u);
                    x.rem_euc_assign(&work);
                }
            }
        }
        let mut col = Vec::with_capacity(2 * g);
        for x in acc.into_iter().skip(1) {
            if !x.is_divisible(&shift) {
                return Err(Error::IntegralityFailure { p, column: i });
            }
            col.push(x.div_exact(&shift).rem_euc(&out_mod));
        }
        cols.push(col);
    }
    let rows = (0..2 * g).map(|r| (0..2 * g).map(|c| cols[c][r].clone()).collect()).collect();
    Ok(FrobMatrix { p, matrix: ModMatrix::new(&IntMatrix::from_rows(rows), out_mod) })
}
