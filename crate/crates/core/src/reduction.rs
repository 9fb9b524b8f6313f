//! Reduction of differentials towards W[-1,0].
//!
//! A differential F(x) x^s y^{-2t} dx/y with deg F <= 2g lives in W[s,t] and
//! is stored as the 2g+1 coefficients of F. Three elementary moves send it to
//! a cohomologous differential:
//!
//! * horizontal: W[s,t] -> W[s-1,t], matrix M_H / D_H(s,t)
//! * diagonal:   W[s,t] -> W[s-1,t-1], matrix M_D / (delta * (2t-1))
//! * vertical:   W[s,t] -> W[s,t-1], matrix M_V / (c0 * delta * (2t-1))
//!
//! Every matrix entry is an integer linear form in (s,t), so a chain of moves
//! whose (s,t) positions are affine in a parameter r is a matrix of
//! polynomials in r. That is what makes the remainder tree applicable.

use rug::{Integer, Rational};

use crate::bezout::{bezout_cofactors, BezoutData};
use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::matrix::IntMatrix;

/// a0 + a_s * s + a_t * t
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinForm {
    pub c: Integer,
    pub s: Integer,
    pub t: Integer,
}

impl LinForm {
    pub fn new(c: impl Into<Integer>, s: impl Into<Integer>, t: impl Into<Integer>) -> Self {
        LinForm { c: c.into(), s: s.into(), t: t.into() }
    }

    pub fn eval(&self, s: i64, t: i64) -> Integer {
        Integer::from(&self.s * s) + Integer::from(&self.t * t) + &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c == 0 && self.s == 0 && self.t == 0
    }

    /// Substitute s = s1 r + s0, t = t1 r + t0; returns [const, r-coefficient].
    fn in_r(&self, s: (i64, i64), t: (i64, i64)) -> [Integer; 2] {
        [Integer::from(&self.s * s.1) + Integer::from(&self.t * t.1) + &self.c, Integer::from(&self.s * s.0) + Integer::from(&self.t * t.0)]
    }
}

/// Square matrix of linear forms in (s,t).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinMatrix {
    n: usize,
    entries: Vec<LinForm>,
}

impl LinMatrix {
    pub fn zero(n: usize) -> Self {
        LinMatrix { n, entries: vec![LinForm::default(); n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &LinForm {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, f: LinForm) {
        self.entries[i * self.n + j] = f;
    }

    pub fn entries(&self) -> &[LinForm] {
        &self.entries
    }
}

/// Entrywise substitution of (s,t).
pub fn eval_linmat(m: &LinMatrix, s: i64, t: i64) -> IntMatrix {
    let mut out = IntMatrix::zero(m.n);
    for (k, f) in m.entries.iter().enumerate() {
        if !f.is_zero() {
            out.set(k / m.n, k % m.n, f.eval(s, t));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StepKind {
    Horizontal,
    Diagonal,
    Vertical,
}

impl StepKind {
    pub fn name(self) -> &'static str {
        match self {
            StepKind::Horizontal => "horizontal",
            StepKind::Diagonal => "diagonal",
            StepKind::Vertical => "vertical",
        }
    }

    /// Target (s,t) of a move from (s,t).
    pub fn target(self, s: i64, t: i64) -> (i64, i64) {
        match self {
            StepKind::Horizontal => (s - 1, t),
            StepKind::Diagonal => (s - 1, t - 1),
            StepKind::Vertical => (s, t - 1),
        }
    }
}

/// One elementary move: the map is (scale * denom(s,t))^{-1} * matrix(s,t).
#[derive(Clone, Debug)]
pub struct ReductionStep {
    pub kind: StepKind,
    pub matrix: LinMatrix,
    pub denom: LinForm,
    pub scale: Integer,
}

impl ReductionStep {
    /// Full denominator scale * denom(s,t).
    pub fn denominator(&self, s: i64, t: i64) -> Integer {
        self.denom.eval(s, t) * &self.scale
    }
}

/// D_H(s,t) = (2g+1)(2t-1) - 2s.
pub fn horizontal_denominator(g: usize) -> LinForm {
    let d = 2 * g as i64 + 1;
    LinForm::new(-d, -2, 2 * d)
}

/// 2t - 1, shared by the diagonal and vertical moves.
pub fn odd_t_denominator() -> LinForm {
    LinForm::new(-1, 0, 2)
}

pub fn build_horizontal(curve: &Curve) -> ReductionStep {
    let n = curve.dim();
    let mut m = LinMatrix::zero(n);
    for k in 0..n - 1 {
        m.set(k + 1, k, horizontal_denominator(curve.genus()));
    }
    // coefficient of x^i in 2s P - (2t-1) x P'
    for i in 0..n {
        let pi = curve.ptop().coeff(i);
        let ip = Integer::from(&pi * i as u64);
        m.set(i, n - 1, LinForm::new(ip.clone(), Integer::from(&pi * 2u32), -(ip * 2u32)));
    }
    ReductionStep { kind: StepKind::Horizontal, matrix: m, denom: horizontal_denominator(curve.genus()), scale: Integer::from(1) }
}

pub fn build_diagonal(curve: &Curve, bz: &BezoutData) -> ReductionStep {
    let n = curve.dim();
    let mut m = LinMatrix::zero(n);
    for i in 0..n {
        let (r, s) = (&bz.r[i], &bz.s[i]);
        // (2t-1) x R_i + 2s S_i + 2x S_i'
        for k in 0..n {
            let r_prev = if k == 0 { Integer::new() } else { r.coeff(k - 1) };
            let sk = s.coeff(k);
            let c = Integer::from(&sk * (2 * k as u64)) - &r_prev;
            m.set(k, i, LinForm::new(c, sk * 2u32, r_prev * 2u32));
        }
    }
    ReductionStep { kind: StepKind::Diagonal, matrix: m, denom: odd_t_denominator(), scale: bz.delta.clone() }
}

pub fn build_vertical(curve: &Curve, bz: &BezoutData) -> Result<ReductionStep> {
    let c0 = curve.c0();
    if *c0 == 0 {
        return Err(Error::ZeroConstantTerm);
    }
    let n = curve.dim();
    let dq = curve.q().derivative();
    let mut m = LinMatrix::zero(n);
    for i in 0..n {
        let (r, s) = (&bz.r[i], &bz.s[i]);
        let h = s.coeff(0);
        // (2t-3) h Q' - 2 h s P + (2t-1) c0 R + 2 c0 s T + 2 c0 S'  with S = h + x T
        for k in 0..n {
            let dqk = dq.coeff(k);
            let rk = r.coeff(k);
            let tk = s.coeff(k + 1);
            let dsk = Integer::from(&tk * (k as u64 + 1));
            let c = Integer::from(&h * &dqk) * -3i32 - Integer::from(c0 * &rk) + Integer::from(c0 * &dsk) * 2u32;
            let sc = Integer::from(&h * &curve.pbot().coeff(k)) * -2i32 + Integer::from(c0 * &tk) * 2u32;
            let tc = Integer::from(&h * &dqk) * 2u32 + Integer::from(c0 * &rk) * 2u32;
            m.set(k, i, LinForm::new(c, sc, tc));
        }
    }
    Ok(ReductionStep { kind: StepKind::Vertical, matrix: m, denom: odd_t_denominator(), scale: Integer::from(c0 * &bz.delta) })
}

/// The three moves for one curve. `vertical` is absent when c0 = 0.
#[derive(Clone, Debug)]
pub struct Reducer {
    pub dim: usize,
    pub genus: usize,
    pub c0: Integer,
    pub delta: Integer,
    pub bezout: BezoutData,
    pub horizontal: ReductionStep,
    pub diagonal: ReductionStep,
    pub vertical: Option<ReductionStep>,
}

impl Reducer {
    pub fn new(curve: &Curve) -> Result<Self> {
        let q = curve.q();
        let bezout = bezout_cofactors(q, &q.derivative())?;
        debug_assert_eq!(&bezout.delta, curve.delta());
        let horizontal = build_horizontal(curve);
        let diagonal = build_diagonal(curve, &bezout);
        let vertical = match build_vertical(curve, &bezout) {
            Ok(v) => Some(v),
            Err(Error::ZeroConstantTerm) => None,
            Err(e) => return Err(e),
        };
        Ok(Reducer {
            dim: curve.dim(),
            genus: curve.genus(),
            c0: curve.c0().clone(),
            delta: bezout.delta.clone(),
            bezout,
            horizontal,
            diagonal,
            vertical,
        })
    }

    pub fn step(&self, kind: StepKind) -> Option<&ReductionStep> {
        match kind {
            StepKind::Horizontal => Some(&self.horizontal),
            StepKind::Diagonal => Some(&self.diagonal),
            StepKind::Vertical => self.vertical.as_ref(),
        }
    }

    fn step_or_err(&self, kind: StepKind, s: i64, t: i64) -> Result<&ReductionStep> {
        self.step(kind).ok_or(Error::IllegalStep { step: kind.name(), s, t })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairCase {
    /// b <= 2a: diagonal moves, then horizontal ones
    DiagonalHorizontal,
    /// b > 2a: diagonal moves, then vertical ones (needs c0 != 0)
    DiagonalVertical,
}

/// Exponent pair (a,b) indexing the form x^{pa-1} y^{-pb+1} dx/y.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AdmissiblePair {
    pub a: u32,
    pub b: u32,
    pub case: PairCase,
}

impl AdmissiblePair {
    pub fn new(a: u32, b: u32) -> Self {
        assert!(a >= 1 && b % 2 == 1, "pair needs a >= 1 and b odd");
        let case = if b <= 2 * a { PairCase::DiagonalHorizontal } else { PairCase::DiagonalVertical };
        AdmissiblePair { a, b, case }
    }

    /// Bound on the p-adic valuation of the denominator product.
    pub fn rho(&self) -> u32 {
        (self.b - 1) / 2 + (2 * self.a).saturating_sub(self.b)
    }
}

/// All pairs (a, 2j+1), 0 <= j < mu, with 1 <= a <= (2g+1)(j+1) - 1; when
/// c0 = 0 only those with a >= j+1. Sorted by (b, a).
pub fn admissible_pairs(g: usize, mu: usize, c0: &Integer) -> Vec<AdmissiblePair> {
    let d = 2 * g as u32 + 1;
    let mut out = Vec::new();
    for j in 0..mu as u32 {
        let lo = if *c0 == 0 { j + 1 } else { 1 };
        for a in lo..=d * (j + 1) - 1 {
            out.push(AdmissiblePair::new(a, 2 * j + 1));
        }
    }
    out
}

fn apply_chain(reducer: &Reducer, chain: &[(StepKind, i64, i64)]) -> Result<(IntMatrix, Integer)> {
    let mut m = IntMatrix::identity(reducer.dim);
    let mut d = Integer::from(1);
    for &(kind, s, t) in chain {
        let step = reducer.step_or_err(kind, s, t)?;
        m = &eval_linmat(&step.matrix, s, t) * &m;
        d *= step.denominator(s, t);
    }
    Ok((m, d))
}

/// (M_r, D_r): reduce from W[a(2r+1)-1, (b(2r+1)-1)/2] to W[a(2r-1)-1, (b(2r-1)-1)/2].
pub fn reduce_to_zero_matrix(reducer: &Reducer, pair: AdmissiblePair, r: u64) -> Result<(IntMatrix, Integer)> {
    assert!(r >= 1);
    let (a, b, r) = (pair.a as i64, pair.b as i64, r as i64);
    let s0 = a * (2 * r + 1) - 1;
    let t0 = (b * (2 * r + 1) - 1) / 2;
    let mut chain = Vec::new();
    match pair.case {
        PairCase::DiagonalHorizontal => {
            for k in 0..b {
                chain.push((StepKind::Diagonal, s0 - k, t0 - k));
            }
            let (s1, t1) = (s0 - b, t0 - b);
            for k in 0..2 * a - b {
                chain.push((StepKind::Horizontal, s1 - k, t1));
            }
        }
        PairCase::DiagonalVertical => {
            for k in 0..2 * a {
                chain.push((StepKind::Diagonal, s0 - k, t0 - k));
            }
            let (s1, t1) = (s0 - 2 * a, t0 - 2 * a);
            for k in 0..b - 2 * a {
                chain.push((StepKind::Vertical, s1, t1 - k));
            }
        }
    }
    apply_chain(reducer, &chain)
}

/// (M_0, D_0): reduce from W[a-1, (b-1)/2] to W[-1, 0].
pub fn final_reduction_matrix(reducer: &Reducer, pair: AdmissiblePair) -> Result<(IntMatrix, Integer)> {
    let (a, b) = (pair.a as i64, pair.b as i64);
    let half = (b - 1) / 2;
    let mut chain = Vec::new();
    match pair.case {
        PairCase::DiagonalHorizontal => {
            for k in 0..half {
                chain.push((StepKind::Diagonal, a - 1 - k, half - k));
            }
            for k in 0..a - half {
                chain.push((StepKind::Horizontal, a - 1 - half - k, 0));
            }
        }
        PairCase::DiagonalVertical => {
            for k in 0..half - a {
                chain.push((StepKind::Vertical, a - 1, half - k));
            }
            for k in 0..a {
                chain.push((StepKind::Diagonal, a - 1 - k, a - k));
            }
        }
    }
    apply_chain(reducer, &chain)
}

/// Polynomial in r with integer coefficients, ascending.
fn rpoly_mul(f: &[Integer], g: &[Integer]) -> Vec<Integer> {
    if f.is_empty() || g.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Integer::new(); f.len() + g.len() - 1];
    for (i, a) in f.iter().enumerate() {
        if *a == 0 {
            continue;
        }
        for (j, b) in g.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    while out.last().is_some_and(|c| *c == 0) {
        out.pop();
    }
    out
}

fn horner(f: &[Integer], r: u64) -> Integer {
    let mut acc = Integer::new();
    for c in f.iter().rev() {
        acc *= r;
        acc += c;
    }
    acc
}

/// M_r and D_r as polynomials in r, for producing the whole sequence
/// M_1, ..., M_{B-1} by evaluation instead of repeated matrix products.
#[derive(Clone, Debug)]
pub struct ZeroStepPoly {
    n: usize,
    matrix: Vec<Vec<Integer>>,
    /// D(r) = constant * prod of the linear factors [c0, c1] = c0 + c1 r
    constant: Integer,
    linear: Vec<[Integer; 2]>,
    denom: Vec<Integer>,
}

/// f / (c0 + c1 r) when the quotient is integral.
fn div_linear(f: &[Integer], c0: &Integer, c1: &Integer) -> Option<Vec<Integer>> {
    if f.is_empty() {
        return Some(Vec::new());
    }
    let mut q = vec![Integer::new(); f.len() - 1];
    let mut carry = f.last().unwrap().clone();
    for k in (0..q.len()).rev() {
        if !carry.is_divisible(c1) {
            return None;
        }
        q[k] = carry.div_exact(c1);
        carry = Integer::from(&f[k] - &q[k] * c0);
    }
    (carry == 0).then_some(q)
}

impl ZeroStepPoly {
    pub fn new(reducer: &Reducer, pair: AdmissiblePair) -> Result<Self> {
        let n = reducer.dim;
        let (a, b) = (pair.a as i64, pair.b as i64);
        // s0 = 2a r + (a - 1), t0 = b r + (b - 1)/2, as (r-coefficient, constant)
        let s0 = (2 * a, a - 1);
        let t0 = (b, (b - 1) / 2);
        let mut schedule = Vec::new();
        let diag = match pair.case {
            PairCase::DiagonalHorizontal => b,
            PairCase::DiagonalVertical => 2 * a,
        };
        for k in 0..diag {
            schedule.push((StepKind::Diagonal, (s0.0, s0.1 - k), (t0.0, t0.1 - k)));
        }
        let s1 = (s0.0, s0.1 - diag);
        let t1 = (t0.0, t0.1 - diag);
        match pair.case {
            PairCase::DiagonalHorizontal => {
                for k in 0..2 * a - b {
                    schedule.push((StepKind::Horizontal, (s1.0, s1.1 - k), t1));
                }
            }
            PairCase::DiagonalVertical => {
                for k in 0..b - 2 * a {
                    schedule.push((StepKind::Vertical, s1, (t1.0, t1.1 - k)));
                }
            }
        }

        let mut matrix: Vec<Vec<Integer>> = (0..n * n).map(|k| if k / n == k % n { vec![Integer::from(1)] } else { Vec::new() }).collect();
        let mut constant = Integer::from(1);
        let mut linear = Vec::new();
        for (kind, s, t) in schedule {
            let step = reducer.step_or_err(kind, s.1, t.1)?;
            let factor: Vec<Vec<Integer>> = step
                .matrix
                .entries()
                .iter()
                .map(|f| {
                    let mut v = f.in_r(s, t).to_vec();
                    while v.last().is_some_and(|c| *c == 0) {
                        v.pop();
                    }
                    v
                })
                .collect();
            let mut next = vec![Vec::new(); n * n];
            for i in 0..n {
                for j in 0..n {
                    let mut acc: Vec<Integer> = Vec::new();
                    for k in 0..n {
                        let prod = rpoly_mul(&factor[i * n + k], &matrix[k * n + j]);
                        if acc.len() < prod.len() {
                            acc.resize(prod.len(), Integer::new());
                        }
                        for (x, y) in acc.iter_mut().zip(prod) {
                            *x += y;
                        }
                    }
                    while acc.last().is_some_and(|c| *c == 0) {
                        acc.pop();
                    }
                    next[i * n + j] = acc;
                }
            }
            matrix = next;
            let [c0, c1] = step.denom.in_r(s, t);
            let content = Integer::from(c0.gcd_ref(&c1));
            constant *= Integer::from(&step.scale * &content);
            linear.push([c0.div_exact(&content), c1.div_exact(&content)]);
        }
        let mut poly = ZeroStepPoly { n, matrix, constant, linear, denom: Vec::new() };
        poly.rebuild_denominator();
        Ok(poly)
    }

    fn rebuild_denominator(&mut self) {
        let mut d = vec![self.constant.clone()];
        for [c0, c1] in &self.linear {
            d = rpoly_mul(&d, &[c0.clone(), c1.clone()]);
        }
        self.denom = d;
    }

    /// Divide numerator and denominator by their common factors: linear
    /// factors of D(r) dividing every entry, then the common integer content.
    /// M(r)/D(r) is unchanged as a rational function.
    pub fn cancel_common_factors(mut self) -> Self {
        let mut kept = Vec::new();
        for [c0, c1] in std::mem::take(&mut self.linear) {
            if c1 == 0 {
                kept.push([c0, c1]);
                continue;
            }
            let divided: Option<Vec<Vec<Integer>>> = self.matrix.iter().map(|f| div_linear(f, &c0, &c1)).collect();
            match divided {
                Some(m) => self.matrix = m,
                None => kept.push([c0, c1]),
            }
        }
        self.linear = kept;
        let content = self.matrix.iter().flatten().fold(Integer::new(), |g, c| g.gcd(c));
        let common = content.gcd(&self.constant);
        if common > 1 {
            for c in self.matrix.iter_mut().flatten() {
                c.div_exact_mut(&common);
            }
            self.constant.div_exact_mut(&common);
        }
        self.rebuild_denominator();
        self
    }

    pub fn matrix_at(&self, r: u64) -> IntMatrix {
        let mut m = IntMatrix::zero(self.n);
        for (k, f) in self.matrix.iter().enumerate() {
            m.set(k / self.n, k % self.n, horner(f, r));
        }
        m
    }

    pub fn denominator_at(&self, r: u64) -> Integer {
        horner(&self.denom, r)
    }
}

/// Element of W[s,t] with exact rational coordinates against
/// (x^s, ..., x^{s+2g}) y^{-2t} dx/y.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferentialVector {
    pub s: i64,
    pub t: i64,
    pub coords: Vec<Rational>,
}

impl DifferentialVector {
    pub fn new(s: i64, t: i64, coords: Vec<Rational>) -> Self {
        assert!(s >= -1);
        assert!(s >= 0 || coords[0] == 0, "W[-1,t] has no x^-1 term");
        DifferentialVector { s, t, coords }
    }

    pub fn basis(s: i64, t: i64, dim: usize, index: usize) -> Self {
        let mut coords = vec![Rational::new(); dim];
        coords[index] = Rational::from(1);
        Self::new(s, t, coords)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| *c == 0)
    }
}

/// Apply a sequence of moves with exact arithmetic.
pub fn rational_reduce(reducer: &Reducer, omega: &DifferentialVector, steps: &[StepKind]) -> Result<DifferentialVector> {
    // Common-denominator form: coords = num / den.
    let mut den = Integer::from(1);
    for c in &omega.coords {
        den.lcm_mut(c.denom());
    }
    let mut num: Vec<Integer> = omega.coords.iter().map(|c| c.numer() * Integer::from(&den / c.denom())).collect();
    let (mut s, mut t) = (omega.s, omega.t);
    for &kind in steps {
        if s < 0 {
            return Err(Error::IllegalStep { step: kind.name(), s, t });
        }
        let step = reducer.step_or_err(kind, s, t)?;
        num = eval_linmat(&step.matrix, s, t).mul_vec(&num);
        den *= step.denominator(s, t);
        (s, t) = kind.target(s, t);
        let g = num.iter().fold(den.clone(), |g, c| g.gcd(c));
        if g > 1 {
            num.iter_mut().for_each(|c| c.div_exact_mut(&g));
            den.div_exact_mut(&g);
        }
    }
    let coords = num.into_iter().map(|c| Rational::from((c, den.clone()))).collect();
    Ok(DifferentialVector::new(s, t, coords))
}

/// Move sequence taking W[ap-1, (bp-1)/2] to W[-1,0]: (p-1)/2 blocks of
/// reduction towards zero, then the final reduction.
pub fn reduction_path(pair: AdmissiblePair, p: u64) -> Vec<StepKind> {
    let (a, b) = (pair.a as usize, pair.b as usize);
    let mut path = Vec::new();
    for _ in 0..(p - 1) / 2 {
        match pair.case {
            PairCase::DiagonalHorizontal => {
                path.extend(std::iter::repeat_n(StepKind::Diagonal, b));
                path.extend(std::iter::repeat_n(StepKind::Horizontal, 2 * a - b));
            }
            PairCase::DiagonalVertical => {
                path.extend(std::iter::repeat_n(StepKind::Diagonal, 2 * a));
                path.extend(std::iter::repeat_n(StepKind::Vertical, b - 2 * a));
            }
        }
    }
    let half = (b - 1) / 2;
    match pair.case {
        PairCase::DiagonalHorizontal => {
            path.extend(std::iter::repeat_n(StepKind::Diagonal, half));
            path.extend(std::iter::repeat_n(StepKind::Horizontal, a - half));
        }
        PairCase::DiagonalVertical => {
            path.extend(std::iter::repeat_n(StepKind::Vertical, half - a));
            path.extend(std::iter::repeat_n(StepKind::Diagonal, a));
        }
    }
    path
}
