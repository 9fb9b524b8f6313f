//! Accumulating remainder trees.
//!
//! Given matrices M_0, ..., M_{B-1} and an exponent lambda, compute
//! M_0 M_1 ... M_{(p-1)/2} mod p^lambda for many odd primes p < 2B at once.
//! Index k = (p-1)/2 sits in leaf floor(2^L k / B) of a tree of depth L whose
//! node (i,j) covers [ceil(jB/2^i), ceil((j+1)B/2^i)).

use std::collections::BTreeMap;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::Integer;

use crate::error::{Error, Result};
use crate::matrix::{IntMatrix, ModMatrix};

/// Levels at or above this depth reduce their products modulo the moduli
/// to their right, which bounds the size of the top of the product tree.
const SUFFIX_LEVELS: usize = 6;

/// Primes below `limit`, ascending.
pub fn sieve_primes(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    if limit < 3 {
        return Vec::new();
    }
    let mut composite = vec![false; limit];
    let mut out = Vec::new();
    for n in 2..limit {
        if composite[n] {
            continue;
        }
        out.push(n as u64);
        let mut m = n * n;
        while m < limit {
            composite[m] = true;
            m += n;
        }
    }
    out
}

/// Shape of one tree run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeConfig {
    /// Sequence length after padding to an even number.
    pub b: usize,
    /// Matrix dimension.
    pub n: usize,
    pub lambda: u32,
    /// Depth of the leaf level.
    pub depth: usize,
}

impl TreeConfig {
    pub fn new(b: usize, n: usize, lambda: u32) -> Result<Self> {
        if b < 2 {
            return Err(Error::SequenceTooShort(b));
        }
        assert!(lambda >= 1, "lambda must be positive");
        let b = b + b % 2;
        let depth = b.next_power_of_two().trailing_zeros() as usize;
        Ok(TreeConfig { b, n, lambda, depth })
    }

    /// Index range [lo, hi) of node (i,j).
    pub fn range(&self, i: usize, j: usize) -> (usize, usize) {
        let ceil = |num: usize| num.div_ceil(1 << i);
        (ceil(j * self.b), ceil((j + 1) * self.b))
    }

    pub fn leaf_of(&self, k: usize) -> usize {
        (k << self.depth) / self.b
    }

    /// One line per level: node count and covered ranges.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        for i in 0..=self.depth.min(4) {
            let nodes: Vec<String> = (0..1usize << i)
                .map(|j| {
                    let (lo, hi) = self.range(i, j);
                    format!("[{lo},{hi})")
                })
                .collect();
            out.push_str(&format!("level {i}: {}\n", nodes.join(" ")));
        }
        out
    }
}

/// Tree over an explicit sequence, for every odd prime p < 2B.
pub fn accumulating_remainder_tree(ms: &[IntMatrix], lambda: u32) -> Result<BTreeMap<u64, ModMatrix>> {
    let primes: Vec<u64> = sieve_primes(2 * ms.len() as u64).into_iter().filter(|&p| p > 2).collect();
    remainder_tree_for_primes(ms, &primes, lambda)
}

/// Tree over an explicit sequence, for the given odd primes only.
pub fn remainder_tree_for_primes(ms: &[IntMatrix], primes: &[u64], lambda: u32) -> Result<BTreeMap<u64, ModMatrix>> {
    let n = ms.first().map_or(0, IntMatrix::dim);
    if let Some(bad) = ms.iter().find(|m| m.dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: bad.dim() });
    }
    remainder_tree_with(ms.len(), n, &|k| ms[k].clone(), primes, lambda)
}

/// Tree whose k-th matrix is produced on demand by `leaf`.
pub fn remainder_tree_with(
    len: usize,
    n: usize,
    leaf: &(dyn Fn(usize) -> IntMatrix + Sync),
    primes: &[u64],
    lambda: u32,
) -> Result<BTreeMap<u64, ModMatrix>> {
    let tree = ModuliTree::new(len, primes, lambda)?;
    Ok(tree.run(n, leaf))
}

/// Products of p^lambda over every node, reusable across sequences of the
/// same length.
#[derive(Clone, Debug)]
pub struct ModuliTree {
    cfg: TreeConfig,
    len: usize,
    primes: Vec<u64>,
    moduli: Vec<Vec<Integer>>,
    /// Product of the moduli to the right of each node on the top levels.
    suffix: Vec<Vec<Integer>>,
}

impl ModuliTree {
    pub fn new(len: usize, primes: &[u64], lambda: u32) -> Result<Self> {
        let cfg = TreeConfig::new(len, 0, lambda)?;
        let depth = cfg.depth;
        for &p in primes {
            if p < 3 || p % 2 == 0 || (p - 1) / 2 >= len as u64 {
                return Err(Error::PrimeOutOfRange { p, limit: 2 * len as u64 });
            }
        }
        let mut leaf_prime = vec![None; 1 << depth];
        for &p in primes {
            let k = ((p - 1) / 2) as usize;
            let j = cfg.leaf_of(k);
            debug_assert_eq!(cfg.range(depth, j), (k, k + 1));
            leaf_prime[j] = Some(p);
        }
        let mut moduli: Vec<Vec<Integer>> = vec![Vec::new(); depth + 1];
        moduli[depth] = leaf_prime.par_iter().map(|p| p.map_or(Integer::from(1), |p| Integer::from(p).pow(lambda))).collect();
        for i in (0..depth).rev() {
            let below = &moduli[i + 1];
            moduli[i] = (0..1usize << i).into_par_iter().map(|j| Integer::from(&below[2 * j] * &below[2 * j + 1])).collect();
        }
        let top = SUFFIX_LEVELS.min(depth);
        let mut suffix: Vec<Vec<Integer>> = vec![vec![Integer::from(1)]];
        for i in 0..top {
            let row: Vec<Integer> = (0..1usize << (i + 1))
                .map(|j| {
                    let up = &suffix[i][j / 2];
                    if j % 2 == 0 {
                        Integer::from(up * &moduli[i + 1][j + 1])
                    } else {
                        up.clone()
                    }
                })
                .collect();
            suffix.push(row);
        }
        Ok(ModuliTree { cfg, len, primes: primes.to_vec(), moduli, suffix })
    }

    pub fn lambda(&self) -> u32 {
        self.cfg.lambda
    }

    /// Leaf values M_0 ... M_{(p-1)/2} mod p^lambda for the n x n sequence `leaf`.
    pub fn run(&self, n: usize, leaf: &(dyn Fn(usize) -> IntMatrix + Sync)) -> BTreeMap<u64, ModMatrix> {
        let cfg = TreeConfig { n, ..self.cfg };
        let depth = cfg.depth;
        let len = self.len;
        let moduli = &self.moduli;
        let suffix = &self.suffix;

        // Products A_{i,j} of M_{k+1} over the node's range; None is the identity.
        // The rightmost node of each level is never read.
        let product = |lo: usize, hi: usize| -> Option<IntMatrix> {
            let mut acc: Option<IntMatrix> = None;
            for k in lo..hi {
                if k + 1 < len {
                    let m = leaf(k + 1);
                    acc = Some(match acc {
                        None => m,
                        Some(a) => &a * &m,
                    });
                }
            }
            acc
        };
        let mut prods: Vec<Vec<Option<IntMatrix>>> = vec![Vec::new(); depth + 1];
        let width = 1usize << depth;
        prods[depth] = (0..width)
            .into_par_iter()
            .map(|j| if j + 1 == width { None } else { product(cfg.range(depth, j).0, cfg.range(depth, j).1) })
            .collect();
        for i in (0..depth).rev() {
            let below = &prods[i + 1];
            let width = 1usize << i;
            let row: Vec<Option<IntMatrix>> = (0..width)
                .into_par_iter()
                .map(|j| {
                    if j + 1 == width {
                        return None;
                    }
                    let m = match (&below[2 * j], &below[2 * j + 1]) {
                        (None, None) => None,
                        (Some(a), None) => Some(a.clone()),
                        (None, Some(b)) => Some(b.clone()),
                        (Some(a), Some(b)) => Some(a * b),
                    };
                    match (m, suffix.get(i)) {
                        (Some(m), Some(suf)) if m.max_bits() > suf[j].significant_bits() => Some(m.reduce(&suf[j])),
                        (m, _) => m,
                    }
                })
                .collect();
            prods[i] = row;
        }

        // Accumulators, top-down; nodes with modulus 1 carry nothing.
        let mut acc: Vec<Option<IntMatrix>> = vec![Some(leaf(0).reduce(&moduli[0][0]))];
        for i in 0..depth {
            let a_row = std::mem::take(&mut prods[i + 1]);
            let m_row = &moduli[i + 1];
            let next: Vec<Option<IntMatrix>> = (0..1usize << (i + 1))
                .into_par_iter()
                .map(|j| {
                    let c = acc[j / 2].as_ref()?;
                    let m = &m_row[j];
                    if *m == 1 {
                        return None;
                    }
                    if j % 2 == 0 {
                        return Some(c.reduce(m));
                    }
                    Some(match &a_row[j - 1] {
                        None => c.reduce(m),
                        Some(a) => (&c.reduce(m) * &a.reduce(m)).reduce(m),
                    })
                })
                .collect();
            acc = next;
        }

        let mut out = BTreeMap::new();
        for &p in &self.primes {
            let j = cfg.leaf_of(((p - 1) / 2) as usize);
            let m = acc[j].take().expect("leaf accumulator present");
            out.insert(p, ModMatrix::new(&m, moduli[depth][j].clone()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rug::Complete;

    fn scalars(v: &[i64]) -> Vec<IntMatrix> {
        v.iter().map(|&c| IntMatrix::from_i64(&[&[c]])).collect()
    }

    #[test]
    fn sieve() {
        assert_eq!(sieve_primes(10), vec![2, 3, 5, 7]);
        assert!(sieve_primes(2).is_empty());
        let hundred = sieve_primes(100);
        assert_eq!((hundred.len(), *hundred.last().unwrap()), (25, 97));
    }

    #[test]
    fn small_scalar_tree() {
        let out = accumulating_remainder_tree(&scalars(&[1, 1, 2, 3]), 1).unwrap();
        let got: Vec<(u64, Integer)> = out.iter().map(|(&p, m)| (p, m.get(0, 0).clone())).collect();
        assert_eq!(got, vec![(3, Integer::from(1)), (5, Integer::from(2)), (7, Integer::from(6))]);
    }

    #[test]
    fn identity_sequence() {
        let ms = vec![IntMatrix::identity(3); 37];
        for (p, m) in accumulating_remainder_tree(&ms, 3).unwrap() {
            assert!(m.matrix().is_identity(), "p = {p}");
            assert_eq!(*m.modulus(), Integer::from(p).pow(3));
        }
    }

    #[test]
    fn half_factorials() {
        let b = 256;
        let ms: Vec<IntMatrix> = (0..b).map(|k| IntMatrix::from_i64(&[&[k.max(1)]])).collect();
        for (p, m) in accumulating_remainder_tree(&ms, 2).unwrap() {
            let modulus = Integer::from(p * p);
            let fact = Integer::factorial(((p - 1) / 2) as u32).complete() % &modulus;
            assert_eq!(m.get(0, 0), &fact, "p = {p}");
        }
    }

    #[test]
    fn partition() {
        for b in [2usize, 3, 10, 256, 1000] {
            let cfg = TreeConfig::new(b, 1, 1).unwrap();
            for i in 0..=cfg.depth {
                let mut next = 0;
                for j in 0..1usize << i {
                    let (lo, hi) = cfg.range(i, j);
                    assert_eq!(lo, next);
                    next = hi;
                }
                assert_eq!(next, cfg.b);
            }
            for k in 0..cfg.b {
                assert_eq!(cfg.range(cfg.depth, cfg.leaf_of(k)), (k, k + 1));
            }
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(accumulating_remainder_tree(&scalars(&[1]), 1), Err(Error::SequenceTooShort(1))));
        let mixed = vec![IntMatrix::identity(2), IntMatrix::identity(3)];
        assert!(matches!(accumulating_remainder_tree(&mixed, 1), Err(Error::DimensionMismatch { .. })));
        let r = remainder_tree_for_primes(&scalars(&[1, 2, 3]), &[7], 1);
        assert!(matches!(r, Err(Error::PrimeOutOfRange { p: 7, .. })));
    }

    #[test]
    fn thread_count_does_not_matter() {
        let ms: Vec<IntMatrix> = (0..200i64).map(|k| IntMatrix::from_i64(&[&[k + 1, k], &[-3, 2 * k - 7]])).collect();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| accumulating_remainder_tree(&ms, 3).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn leaves_match_direct_products(
            entries in proptest::collection::vec(-1000i64..1000, 4 * 40),
            lambda in 1u32..4,
        ) {
            let ms: Vec<IntMatrix> = entries.chunks(4).map(|c| IntMatrix::from_i64(&[&c[..2], &c[2..]])).collect();
            let out = accumulating_remainder_tree(&ms, lambda).unwrap();
            for (p, m) in out {
                let modulus = Integer::from(p).pow(lambda);
                let mut direct = IntMatrix::identity(2);
                for mk in &ms[..=((p - 1) / 2) as usize] {
                    direct = &direct * mk;
                }
                prop_assert_eq!(m.matrix(), &direct.reduce(&modulus));
            }
        }
    }
}
