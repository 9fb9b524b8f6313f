//! Square matrices over Z and Z/mZ.

use std::fmt;
use std::ops::Mul;

use rayon::prelude::*;
use rug::ops::RemRounding;
use rug::Integer;

/// Entries past this many bits are multiplied in parallel.
const PAR_BITS: u32 = 1 << 14;

/// Square integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    n: usize,
    data: Vec<Integer>,
}

impl IntMatrix {
    pub fn zero(n: usize) -> Self {
        IntMatrix { n, data: vec![Integer::new(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.data[i * n + i] = Integer::from(1);
        }
        m
    }

    pub fn scalar(c: Integer) -> Self {
        IntMatrix { n: 1, data: vec![c] }
    }

    pub fn from_rows(rows: Vec<Vec<Integer>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        IntMatrix { n, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&c| Integer::from(c)).collect()).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Integer {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Integer) {
        self.data[i * self.n + j] = v;
    }

    pub fn entries(&self) -> &[Integer] {
        &self.data
    }

    pub fn entries_mut(&mut self) -> &mut [Integer] {
        &mut self.data
    }

    pub fn column(&self, j: usize) -> Vec<Integer> {
        (0..self.n).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row_is_zero(&self, i: usize) -> bool {
        (0..self.n).all(|j| *self.get(i, j) == 0)
    }

    /// max over columns of the column's L1 norm.
    pub fn norm(&self) -> Integer {
        (0..self.n).map(|j| (0..self.n).map(|i| Integer::from(self.get(i, j).abs_ref())).sum::<Integer>()).max().unwrap_or_default()
    }

    pub fn max_bits(&self) -> u32 {
        self.data.iter().map(|c| c.significant_bits()).max().unwrap_or(0)
    }

    pub fn is_identity(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| *self.get(i, j) == i32::from(i == j)))
    }

    pub fn mul_vec(&self, v: &[Integer]) -> Vec<Integer> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                let mut acc = Integer::new();
                for (j, x) in v.iter().enumerate() {
                    acc += self.get(i, j) * x;
                }
                acc
            })
            .collect()
    }

    /// Entrywise canonical residues in [0, m).
    pub fn reduce(&self, m: &Integer) -> IntMatrix {
        let data = if self.max_bits() > PAR_BITS {
            self.data.par_iter().map(|c| Integer::from(c.rem_euc(m))).collect()
        } else {
            self.data.iter().map(|c| Integer::from(c.rem_euc(m))).collect()
        };
        IntMatrix { n: self.n, data }
    }

    fn product(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let n = self.n;
        let entry = |idx: usize| {
            let (i, j) = (idx / n, idx % n);
            let mut acc = Integer::new();
            for k in 0..n {
                let a = self.get(i, k);
                let b = rhs.get(k, j);
                if *a != 0 && *b != 0 {
                    acc += a * b;
                }
            }
            acc
        };
        let data = if self.max_bits().max(rhs.max_bits()) > PAR_BITS {
            (0..n * n).into_par_iter().map(entry).collect()
        } else {
            (0..n * n).map(entry).collect()
        };
        IntMatrix { n, data }
    }
}

impl Mul for &IntMatrix {
    type Output = IntMatrix;
    fn mul(self, rhs: &IntMatrix) -> IntMatrix {
        self.product(rhs)
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Matrix of canonical residues modulo `modulus`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModMatrix {
    modulus: Integer,
    m: IntMatrix,
}

impl ModMatrix {
    pub fn new(m: &IntMatrix, modulus: Integer) -> Self {
        ModMatrix { m: m.reduce(&modulus), modulus }
    }

    pub fn identity(n: usize, modulus: Integer) -> Self {
        Self::new(&IntMatrix::identity(n), modulus)
    }

    pub fn modulus(&self) -> &Integer {
        &self.modulus
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> &Integer {
        self.m.get(i, j)
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn mul(&self, rhs: &ModMatrix) -> ModMatrix {
        assert_eq!(self.modulus, rhs.modulus, "moduli differ");
        ModMatrix { m: (&self.m * &rhs.m).reduce(&self.modulus), modulus: self.modulus.clone() }
    }

    /// Reduce further to a divisor of the current modulus.
    pub fn reduce_to(&self, modulus: &Integer) -> ModMatrix {
        debug_assert!(self.modulus.is_divisible(modulus));
        ModMatrix { m: self.m.reduce(modulus), modulus: modulus.clone() }
    }

    pub fn trace(&self) -> Integer {
        let t: Integer = (0..self.dim()).map(|i| self.get(i, i).clone()).sum();
        t.rem_euc(&self.modulus)
    }
}
