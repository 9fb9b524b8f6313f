//! From a Frobenius matrix mod p^mu to the exact L-polynomial.
//!
//! Convention: P(T) = det(1 - T F) = sum a_i T^i, so a_1 = -trace(F) and
//! #X(F_p) = p + 1 + a_1.

use std::fmt;

use rug::ops::{Pow, RemRounding};
use rug::Complete;
use rug::Integer;

use crate::error::{Error, Result};
use crate::matrix::ModMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Computed,
    Fallback,
    Bad,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Computed => "computed",
            Status::Fallback => "fallback",
            Status::Bad => "bad",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One output line: the L-polynomial at p, absent for bad primes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LPolyRecord {
    pub p: u64,
    pub status: Status,
    /// a_0, ..., a_{2g}; empty when bad.
    pub a: Vec<Integer>,
}

impl LPolyRecord {
    pub fn bad(p: u64) -> Self {
        LPolyRecord { p, status: Status::Bad, a: Vec::new() }
    }

    pub fn genus(&self) -> usize {
        self.a.len().saturating_sub(1) / 2
    }

    /// Functional equation and Weil bounds.
    pub fn check(&self) -> Result<()> {
        if self.status == Status::Bad {
            return Ok(());
        }
        let g = self.genus();
        let p = self.p;
        for i in 0..=2 * g {
            if !within_weil_bound(&self.a[i], p, g, i) {
                return Err(Error::WeilBoundViolation { p, i });
            }
        }
        for i in 0..=g {
            if self.a[2 * g - i] != Integer::from(p).pow((g - i) as u32) * &self.a[i] {
                return Err(Error::FunctionalEquationMismatch { p, i: 2 * g - i });
            }
        }
        Ok(())
    }

    /// a_i as a comma-free display of the polynomial, for diagnostics.
    pub fn describe(&self) -> String {
        if self.a.is_empty() {
            return "bad".into();
        }
        let terms: Vec<String> = self.a.iter().map(Integer::to_string).collect();
        format!("[{}]", terms.join(" "))
    }
}

/// a^2 <= binom(2g,i)^2 p^i
fn within_weil_bound(a: &Integer, p: u64, g: usize, i: usize) -> bool {
    let bound = Integer::binomial_u(2 * g as u32, i as u32).complete().square() * Integer::from(p).pow(i as u32);
    Integer::from(a.square_ref()) <= bound
}

/// Elementary symmetric functions e_1..e_n of the eigenvalues of F.
pub fn charpoly_mod(f: &ModMatrix, p: u64) -> Result<Vec<Integer>> {
    let n = f.dim();
    let m = f.modulus();
    let mut power = f.clone();
    let mut s = Vec::with_capacity(n);
    for k in 0..n {
        if k > 0 {
            power = power.mul(f);
        }
        s.push(power.trace());
    }
    let mut e = vec![Integer::from(1)];
    for k in 1..=n {
        let mut sum = Integer::new();
        for i in 1..=k {
            let term = Integer::from(&e[k - i] * &s[i - 1]);
            if i % 2 == 1 {
                sum += term;
            } else {
                sum -= term;
            }
        }
        let inv = Integer::from(k).invert(m).map_err(|_| Error::NonInvertibleSmallInteger { k: k as u64, p })?;
        e.push((sum * inv).rem_euc(m));
    }
    e.remove(0);
    Ok(e)
}

/// Representative in (-m/2, m/2].
pub fn balanced(x: &Integer, m: &Integer) -> Integer {
    let r = Integer::from(x.rem_euc(m));
    if Integer::from(&r << 1) > *m {
        r - m
    } else {
        r
    }
}

/// Recover P(T) from e_1..e_{2g} mod p^mu using the Weil bounds for i <= g
/// and the functional equation for the rest.
pub fn lift_weil_lpoly(e: &[Integer], p: u64, g: usize, mu: usize) -> Result<LPolyRecord> {
    assert!(e.len() >= g, "need e_1..e_g");
    let m = Integer::from(p).pow(mu as u32);
    let mut a = vec![Integer::new(); 2 * g + 1];
    a[0] = Integer::from(1);
    for i in 1..=g {
        let lift = balanced(&e[i - 1], &m);
        a[i] = if i % 2 == 1 { -lift } else { lift };
        if !within_weil_bound(&a[i], p, g, i) {
            return Err(Error::WeilBoundViolation { p, i });
        }
    }
    for i in 0..g {
        a[2 * g - i] = Integer::from(p).pow((g - i) as u32) * &a[i];
    }
    for k in g + 1..=2 * g {
        if let Some(ek) = e.get(k - 1) {
            let signed = if k % 2 == 1 { -Integer::from(ek) } else { ek.clone() };
            if (Integer::from(&a[k] - &signed)).rem_euc(&m) != 0 {
                return Err(Error::FunctionalEquationMismatch { p, i: k });
            }
        }
    }
    Ok(LPolyRecord { p, status: Status::Computed, a })
}
