//! Integer polynomials and the curve y^2 = Q(x).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::Integer;

use crate::bezout::sylvester_resultant;
use crate::error::{Error, Result};

/// Polynomial over Z, coefficients ascending by degree.
///
/// The coefficient vector never carries trailing zeros, so the zero
/// polynomial is the empty vector.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    coeffs: Vec<Integer>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Integer>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| Integer::from(c)).collect())
    }

    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn monomial(c: Integer, degree: usize) -> Self {
        let mut coeffs = vec![Integer::new(); degree + 1];
        coeffs[degree] = c;
        Poly::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Integer> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of x^i, zero past the end.
    pub fn coeff(&self, i: usize) -> Integer {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn leading(&self) -> Option<&Integer> {
        self.coeffs.last()
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| Integer::from(c * i as u64)).collect())
    }

    pub fn scale(&self, k: &Integer) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| Integer::from(c * k)).collect())
    }

    /// Multiply by x^k.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Integer::new(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Poly { coeffs }
    }

    pub fn eval(&self, x: &Integer) -> Integer {
        let mut acc = Integer::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    /// Maximum absolute value of the coefficients.
    pub fn norm(&self) -> Integer {
        self.coeffs.iter().map(|c| c.clone().abs()).max().unwrap_or_default()
    }
}

/// Maximum absolute coefficient; zero for the zero polynomial.
pub fn poly_norm(f: &Poly) -> Integer {
    f.norm()
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| Integer::from(-c)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Integer::new(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
            let sign = if *c < 0 { "-" } else { "+" };
            if first {
                if *c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let abs = c.clone().abs();
            match (i, abs == 1) {
                (0, _) => write!(f, "{abs}")?,
                (1, true) => write!(f, "x")?,
                (1, false) => write!(f, "{abs}x")?,
                (_, true) => write!(f, "x^{i}")?,
                (_, false) => write!(f, "{abs}x^{i}")?,
            }
        }
        Ok(())
    }
}

/// The curve y^2 = Q(x) with Q monic, squarefree, of degree 2g+1.
#[derive(Clone, Debug)]
pub struct Curve {
    q: Poly,
    genus: usize,
    delta: Integer,
    c0: Integer,
    /// Q = x^{2g+1} + ptop
    ptop: Poly,
    /// Q = c0 + x * pbot
    pbot: Poly,
}

impl Curve {
    pub fn q(&self) -> &Poly {
        &self.q
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    /// Resultant of Q and Q' (Sylvester determinant).
    pub fn delta(&self) -> &Integer {
        &self.delta
    }

    pub fn c0(&self) -> &Integer {
        &self.c0
    }

    pub fn ptop(&self) -> &Poly {
        &self.ptop
    }

    pub fn pbot(&self) -> &Poly {
        &self.pbot
    }

    /// Dimension 2g+1 of the spaces W[s,t].
    pub fn dim(&self) -> usize {
        2 * self.genus + 1
    }

    /// Odd primes not dividing delta.
    pub fn is_good_prime(&self, p: u64) -> bool {
        p != 2 && !divides(p, &self.delta)
    }
}

fn divides(p: u64, n: &Integer) -> bool {
    let p = Integer::from(p);
    n.is_divisible(&p)
}

/// Build a curve from ascending coefficients c_0, ..., c_{2g+1}.
pub fn parse_curve(coeffs: &[Integer]) -> Result<Curve> {
    let q = Poly::new(coeffs.to_vec());
    let degree = q.degree().ok_or_else(|| Error::Parse("zero polynomial".into()))?;
    if degree % 2 == 0 || degree < 3 {
        return Err(Error::EvenDegree(degree));
    }
    let lead = q.leading().expect("nonzero");
    if *lead != 1 {
        return Err(Error::NotMonic(lead.to_string()));
    }
    let delta = sylvester_resultant(&q, &q.derivative());
    if delta == 0 {
        return Err(Error::NotSquarefree);
    }
    let c0 = q.coeff(0);
    let ptop = Poly::new(q.coeffs()[..degree].to_vec());
    let pbot = Poly::new(q.coeffs()[1..].to_vec());
    Ok(Curve { genus: (degree - 1) / 2, q, delta, c0, ptop, pbot })
}

/// Parse "c0,c1,...,c_{2g+1}" (ascending degree) into a curve.
pub fn parse_curve_str(text: &str) -> Result<Curve> {
    let coeffs = text
        .trim()
        .split(',')
        .map(|tok| tok.trim().parse::<Integer>().map_err(|_| Error::Parse(format!("bad coefficient {:?}", tok.trim()))))
        .collect::<Result<Vec<_>>>()?;
    // The degree check in parse_curve keys on the trimmed polynomial, so an
    // explicit trailing zero would be silently dropped; reject it here.
    if coeffs.last().is_some_and(|c| *c != 1) {
        return Err(Error::NotMonic(coeffs.last().unwrap().to_string()));
    }
    parse_curve(&coeffs)
}

/// Table C[j][r] = coefficient of x^r in Q^j, for 0 <= j < mu.
pub fn poly_pow_coeffs(curve: &Curve, mu: usize) -> Vec<Vec<Integer>> {
    let mut table = Vec::with_capacity(mu);
    let mut power = Poly::from_i64(&[1]);
    for _ in 0..mu {
        table.push(power.coeffs().to_vec());
        power = &power * curve.q();
    }
    table
}
