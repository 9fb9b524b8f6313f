//! Checks shared by the invariant suite and the acceptance run.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Integer, Rational};

use hyperzeta::bezout::{bezout_cofactors, sylvester_matrix, sylvester_resultant};
use hyperzeta::cli::{run_on_curve, CurveSource, RunConfig, RunStats};
use hyperzeta::oracle::{direct_mod_product, lpoly_from_counts, point_count, DEFAULT_BUDGET_BITS};
use hyperzeta::reduction::{rational_reduce, DifferentialVector, Reducer, StepKind};
use hyperzeta::rtree::{accumulating_remainder_tree, sieve_primes};
use hyperzeta::{parse_curve, Curve, IntMatrix, LPolyRecord, Poly, Status};

pub fn curve(coeffs: &[i64]) -> Curve {
    parse_curve(&coeffs.iter().map(|&c| Integer::from(c)).collect::<Vec<_>>()).unwrap()
}

/// Monic squarefree Q of degree 2g+1 with small coefficients and c0 != 0.
pub fn random_curve(rng: &mut impl Rng, g: usize) -> Curve {
    loop {
        let mut c: Vec<i64> = (0..=2 * g).map(|_| rng.gen_range(-3..=3)).collect();
        c.push(1);
        if c[0] == 0 {
            continue;
        }
        if let Ok(curve) = parse_curve(&c.iter().map(|&x| Integer::from(x)).collect::<Vec<_>>()) {
            return curve;
        }
    }
}

/// A random move sequence from (s,t) to (-1,0). Every vertical move comes
/// before the move that takes s to -1.
pub fn random_path(rng: &mut impl Rng, s: i64, t: i64) -> Vec<StepKind> {
    let d = rng.gen_range(0..=(s + 1).min(t));
    let mut path: Vec<StepKind> = std::iter::repeat_n(StepKind::Diagonal, d as usize)
        .chain(std::iter::repeat_n(StepKind::Horizontal, (s + 1 - d) as usize))
        .chain(std::iter::repeat_n(StepKind::Vertical, (t - d) as usize))
        .collect();
    path.shuffle(rng);
    if path.last() == Some(&StepKind::Vertical) {
        let k = path.iter().rposition(|&m| m != StepKind::Vertical).expect("s + 1 >= 1 moves change s");
        let m = path.remove(k);
        path.push(m);
    }
    path
}

fn random_rational(rng: &mut impl Rng) -> Rational {
    Rational::from((rng.gen_range(-20i64..=20), rng.gen_range(1i64..=5)))
}

/// Reduce a random element of W[s,t] along several random paths and compare.
pub fn check_path_independence(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = rng.gen_range(1..=2);
    let curve = random_curve(&mut rng, g);
    let reducer = Reducer::new(&curve).map_err(|e| e.to_string())?;
    let s = rng.gen_range(0..=8);
    let t = rng.gen_range(0..=6);
    let coords = (0..reducer.dim).map(|_| random_rational(&mut rng)).collect();
    let omega = DifferentialVector::new(s, t, coords);
    let mut first: Option<(Vec<StepKind>, DifferentialVector)> = None;
    for _ in 0..3 {
        let path = random_path(&mut rng, s, t);
        let out = rational_reduce(&reducer, &omega, &path).map_err(|e| e.to_string())?;
        if (out.s, out.t) != (-1, 0) {
            return Err(format!("path {path:?} ended at ({}, {})", out.s, out.t));
        }
        match &first {
            None => first = Some((path, out)),
            Some((p0, v0)) if *v0 != out => {
                return Err(format!("Q = {}, (s,t) = ({s},{t}): {p0:?} and {path:?} disagree", curve.q()));
            }
            _ => {}
        }
    }
    Ok(())
}

/// d(x^s y^{-2t+1}) = (s Q + (1-2t)/2 x Q') x^{s-1} y^{-2t} dx/y reduces to zero.
pub fn check_exact_form(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = rng.gen_range(1..=2);
    let curve = random_curve(&mut rng, g);
    let reducer = Reducer::new(&curve).map_err(|e| e.to_string())?;
    let s = rng.gen_range(1..=8);
    let t = rng.gen_range(0..=6);
    let q = curve.q();
    let twice = &q.scale(&Integer::from(2 * s)) + &q.derivative().shift(1).scale(&Integer::from(1 - 2 * t));
    let e: Vec<Rational> = (0..=2 * g + 1).map(|i| Rational::from((twice.coeff(i), 2))).collect();
    // x^s..x^{s+2g} lives in W[s,t]; the x^{s-1} term in W[s-1,t].
    let upper = DifferentialVector::new(s, t, e[1..].to_vec());
    let mut low = vec![Rational::new(); reducer.dim];
    low[0] = e[0].clone();
    let lower = DifferentialVector::new(s - 1, t, low);
    let a = rational_reduce(&reducer, &upper, &random_path(&mut rng, s, t)).map_err(|e| e.to_string())?;
    let b = rational_reduce(&reducer, &lower, &random_path(&mut rng, s - 1, t)).map_err(|e| e.to_string())?;
    let sum: Vec<Rational> = a.coords.iter().zip(&b.coords).map(|(x, y)| Rational::from(x + y)).collect();
    if sum.iter().any(|c| *c != 0) {
        return Err(format!("Q = {}, (s,t) = ({s},{t}): residue {sum:?}", curve.q()));
    }
    Ok(())
}

fn random_poly(rng: &mut impl Rng, degree: usize) -> Poly {
    let mut c: Vec<i64> = (0..degree).map(|_| rng.gen_range(-50..=50)).collect();
    let mut lead = 0;
    while lead == 0 {
        lead = rng.gen_range(-50..=50);
    }
    c.push(lead);
    Poly::from_i64(&c)
}

/// Determinant by fraction-free elimination.
pub fn bareiss_det(mut a: Vec<Vec<Integer>>) -> Integer {
    let n = a.len();
    let mut sign = 1;
    let mut prev = Integer::from(1);
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return Integer::new(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = Integer::from(&a[i][j] * &a[k][k]) - Integer::from(&a[i][k] * &a[k][j]);
                a[i][j] = v.div_exact(&prev);
            }
        }
        prev = a[k][k].clone();
    }
    prev * sign
}

/// A random pair with degrees <= 7: resultant against elimination, and for
/// coprime pairs every identity F R_i + G S_i = delta x^i with degree bounds.
/// Returns whether the pair was coprime.
pub fn check_bezout(seed: u64) -> Result<bool, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (df, dg) = (rng.gen_range(1..=7), rng.gen_range(1..=7));
    let f = random_poly(&mut rng, df);
    let g = random_poly(&mut rng, dg);
    let delta = sylvester_resultant(&f, &g);
    let det = bareiss_det(sylvester_matrix(&f, &g));
    if delta != det {
        return Err(format!("F = {f}, G = {g}: resultant {delta} but elimination gives {det}"));
    }
    if delta == 0 {
        return Ok(false);
    }
    let bz = bezout_cofactors(&f, &g).map_err(|e| e.to_string())?;
    let (m, n) = (f.degree().unwrap(), g.degree().unwrap());
    if bz.delta != delta || bz.r.len() != m + n || bz.s.len() != m + n {
        return Err(format!("F = {f}, G = {g}: malformed cofactors"));
    }
    for i in 0..m + n {
        let lhs = &(&f * &bz.r[i]) + &(&g * &bz.s[i]);
        if lhs != Poly::monomial(delta.clone(), i) {
            return Err(format!("F = {f}, G = {g}: identity {i} fails"));
        }
        if bz.r[i].degree().is_some_and(|d| d >= n) || bz.s[i].degree().is_some_and(|d| d >= m) {
            return Err(format!("F = {f}, G = {g}: degree bound {i} fails"));
        }
    }
    Ok(true)
}

/// A random 3x3 sequence of length 256 against direct products for every odd p < 512.
pub fn check_tree_equivalence(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lambda = rng.gen_range(1..=4);
    let ms: Vec<IntMatrix> = (0..256)
        .map(|_| {
            let rows: Vec<Vec<Integer>> =
                (0..3).map(|_| (0..3).map(|_| Integer::from(rng.gen_range(-1_000_000i64..=1_000_000))).collect()).collect();
            IntMatrix::from_rows(rows)
        })
        .collect();
    let out = accumulating_remainder_tree(&ms, lambda).map_err(|e| e.to_string())?;
    let primes: Vec<u64> = sieve_primes(512).into_iter().filter(|&p| p > 2).collect();
    if out.keys().copied().collect::<Vec<_>>() != primes {
        return Err("tree does not cover every odd prime below 512".into());
    }
    for p in primes {
        let direct = direct_mod_product(&ms, p, ((p - 1) / 2) as usize, lambda);
        if out[&p] != direct {
            return Err(format!("seed {seed}, lambda {lambda}: leaf at p = {p} differs"));
        }
    }
    Ok(())
}

/// leaf(p)^2 = (-1)^{(p+1)/2} mod p for the half-factorial tree; returns the prime count.
pub fn check_wilson(limit: u64) -> Result<usize, String> {
    let b = (limit / 2) as usize;
    let ms: Vec<IntMatrix> = (0..b).map(|k| IntMatrix::scalar(Integer::from(k.max(1)))).collect();
    let out = accumulating_remainder_tree(&ms, 2).map_err(|e| e.to_string())?;
    let expected = sieve_primes(limit).into_iter().filter(|&p| p > 2).count();
    if out.len() != expected {
        return Err(format!("{} leaves for {expected} primes", out.len()));
    }
    for (p, m) in &out {
        let pz = Integer::from(*p);
        let sq = Integer::from(m.get(0, 0).square_ref()) % &pz;
        let want = if p.div_ceil(2) % 2 == 0 { Integer::from(1) } else { pz.clone() - 1u32 };
        if sq != want {
            return Err(format!("p = {p}: leaf^2 = {sq}"));
        }
    }
    Ok(out.len())
}

/// Oracle L-polynomial from counts over F_p, ..., F_{p^g}.
pub fn oracle_lpoly(curve: &Curve, p: u64) -> LPolyRecord {
    let g = curve.genus();
    let counts: Vec<Integer> = (1..=g).map(|n| point_count(curve, p, n, DEFAULT_BUDGET_BITS).unwrap()).collect();
    lpoly_from_counts(p, g, &counts).unwrap()
}

/// Outcome of running the pipeline on one curve and comparing with the oracle.
#[derive(Debug, Default)]
pub struct CurveCheck {
    pub records: usize,
    pub computed: usize,
    pub fallback: usize,
    pub bad: usize,
    pub compared: usize,
    pub mismatches: Vec<u64>,
    pub stats: RunStats,
}

/// Pipeline records for odd p < limit against the oracle, for records with
/// p >= min_compare. Bad records must be exactly the odd primes dividing delta.
pub fn check_curve(coeffs: &[i64], limit: u64, min_compare: u64) -> Result<CurveCheck, String> {
    let curve = curve(coeffs);
    let cfg = RunConfig::new(CurveSource::Coeffs(coeffs.iter().map(i64::to_string).collect::<Vec<_>>().join(",")), limit);
    let (records, stats) = run_on_curve(&curve, &cfg).map_err(|e| e.to_string())?;
    let mut out = CurveCheck { records: records.len(), stats, ..Default::default() };
    for r in &records {
        let divides = curve.delta().is_divisible(&Integer::from(r.p));
        match r.status {
            Status::Computed => out.computed += 1,
            Status::Fallback => out.fallback += 1,
            Status::Bad => out.bad += 1,
        }
        if (r.status == Status::Bad) != divides {
            out.mismatches.push(r.p);
            continue;
        }
        if r.status == Status::Bad || r.p < min_compare {
            continue;
        }
        out.compared += 1;
        if oracle_lpoly(&curve, r.p).a != r.a {
            out.mismatches.push(r.p);
        }
    }
    Ok(out)
}
