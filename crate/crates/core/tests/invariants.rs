mod common;

use proptest::prelude::*;
use rug::ops::Pow;
use rug::Integer;

use common::*;
use hyperzeta::cli::{run_on_curve, write_records, CurveSource, Format, RunConfig};
use hyperzeta::curve::poly_pow_coeffs;
use hyperzeta::frobenius::{assemble_frobenius, compute_u_table, FrobContext};
use hyperzeta::oracle::{exact_frobenius, point_count, DEFAULT_BUDGET_BITS, EXACT_U_MAX_P};
use hyperzeta::rtree::sieve_primes;
use hyperzeta::zeta::balanced;
use hyperzeta::{IntMatrix, Status};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn reduction_is_path_independent(seed in any::<u64>()) {
        check_path_independence(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn exact_forms_reduce_to_zero(seed in any::<u64>()) {
        check_exact_form(seed).map_err(TestCaseError::fail)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn bezout_identities_hold(seed in any::<u64>()) {
        check_bezout(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn norm_is_submultiplicative(
        a in proptest::collection::vec(-1000i64..1000, 16),
        b in proptest::collection::vec(-1000i64..1000, 16),
    ) {
        let m = |v: &[i64]| IntMatrix::from_i64(&[&v[0..4], &v[4..8], &v[8..12], &v[12..16]]);
        let (x, y) = (m(&a), m(&b));
        prop_assert!((&x * &y).norm() <= x.norm() * y.norm());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(5))]

    #[test]
    fn tree_leaves_match_direct_products(seed in any::<u64>()) {
        check_tree_equivalence(seed).map_err(TestCaseError::fail)?;
    }
}

#[test]
fn wilson_property_small() {
    assert_eq!(check_wilson(10_000).unwrap(), 1228);
}

#[test]
fn power_table_is_a_convolution() {
    for coeffs in [&[1, 1, 0, 1][..], &[0, -1, 0, 1], &[1, -1, 0, 0, 0, 1]] {
        let c = curve(coeffs);
        let table = poly_pow_coeffs(&c, 6);
        for j in 0..5 {
            let next = &hyperzeta::Poly::new(table[j].clone()) * c.q();
            assert_eq!(next.coeffs(), &table[j + 1][..]);
        }
    }
}

#[test]
fn frobenius_matches_exact_reduction() {
    let c = curve(&[1, 1, 0, 1]);
    let ctx = FrobContext::new(&c).unwrap();
    let primes: Vec<u64> = sieve_primes(EXACT_U_MAX_P + 1).into_iter().filter(|&p| ctx.in_main_range(p)).collect();
    let table = compute_u_table(&ctx, &primes, EXACT_U_MAX_P + 1).unwrap();
    for p in primes {
        let f = assemble_frobenius(&ctx, p, &table).unwrap();
        assert_eq!(f.matrix, exact_frobenius(&c, p).unwrap(), "p = {p}");
    }
}

#[test]
fn traces_lie_in_hasse_weil_window() {
    for (coeffs, limit) in [(&[1, 1, 0, 1][..], 1000u64), (&[1, -1, 0, 0, 0, 1], 300)] {
        let c = curve(coeffs);
        let g = c.genus() as u64;
        let ctx = FrobContext::new(&c).unwrap();
        let primes: Vec<u64> = sieve_primes(limit).into_iter().filter(|&p| ctx.in_main_range(p)).collect();
        let table = compute_u_table(&ctx, &primes, limit).unwrap();
        for p in primes {
            let f = assemble_frobenius(&ctx, p, &table).unwrap();
            let lift = balanced(&f.trace(), f.matrix.modulus());
            let bound = 2 * g * (p as f64).sqrt().floor() as u64 + 2 * g;
            assert!(lift.clone().abs() <= bound, "p = {p}, trace {lift}");
        }
    }
}

#[test]
fn sign_convention_against_point_counts() {
    let c = curve(&[1, 1, 0, 1]);
    let cfg = RunConfig::new(CurveSource::Coeffs("1,1,0,1".into()), 120);
    let (records, _) = run_on_curve(&c, &cfg).unwrap();
    let seven = records.iter().find(|r| r.p == 7).unwrap();
    assert_eq!((seven.status, seven.a[1].to_i64()), (Status::Fallback, Some(-3)));
    let computed: Vec<_> = records.iter().filter(|r| r.status == Status::Computed).take(10).collect();
    assert_eq!(computed.len(), 10);
    for r in computed {
        let count = point_count(&c, r.p, 1, DEFAULT_BUDGET_BITS).unwrap();
        let ap = Integer::from(r.p + 1) - count;
        assert_eq!(r.a[1], -ap, "p = {}", r.p);
        assert_eq!(r.a[2], r.p);
    }
}

#[test]
fn genus_two_main_path_matches_oracle() {
    let check = check_curve(&[1, -1, 0, 0, 0, 1], 200, 0).unwrap();
    assert!(check.mismatches.is_empty(), "{:?}", check.mismatches);
    assert!(check.computed > 0);
    assert!(check.stats.max_excess <= 0);
}

#[test]
fn genus_three_main_path_matches_low_counts() {
    // The top coefficient needs counts over F_{p^3}; a_1 and a_2 are cheap.
    let c = curve(&[1, 1, 0, 0, 0, 0, 0, 1]);
    let cfg = RunConfig::new(CurveSource::Coeffs("1,1,0,0,0,0,0,1".into()), 180);
    let (records, stats) = run_on_curve(&c, &cfg).unwrap();
    assert!(stats.max_excess <= 0);
    let computed: Vec<_> = records.iter().filter(|r| r.status == Status::Computed).collect();
    assert_eq!(computed.iter().map(|r| r.p).collect::<Vec<_>>(), vec![163, 167, 173, 179]);
    for r in computed {
        let s: Vec<Integer> =
            (1..=2).map(|n| Integer::from(r.p).pow(n as u32) + 1u32 - point_count(&c, r.p, n, DEFAULT_BUDGET_BITS).unwrap()).collect();
        // Newton: a_1 = -s_1, a_2 = (s_1^2 - s_2) / 2
        assert_eq!(r.a[1], Integer::from(-&s[0]), "p = {}", r.p);
        let e2 = (Integer::from(s[0].square_ref()) - &s[1]) / 2u32;
        assert_eq!(r.a[2], e2, "p = {}", r.p);
    }
}

#[test]
fn record_count_and_thread_independence() {
    let run = |threads| {
        let mut cfg = RunConfig::new(CurveSource::Coeffs("0,-1,0,1".into()), 600);
        cfg.threads = threads;
        let (records, _) = hyperzeta::cli::run_pipeline(&cfg).unwrap();
        let mut out = Vec::new();
        write_records(&mut out, &records, 1, Format::Jsonl).unwrap();
        (records.len(), out)
    };
    let (n1, a) = run(1);
    let (n3, b) = run(3);
    assert_eq!(n1, sieve_primes(600).len() - 1);
    assert_eq!(n1, n3);
    assert_eq!(a, b);
}

#[test]
fn zero_constant_term_curve_matches_oracle() {
    let check = check_curve(&[0, -1, 0, 1], 400, 0).unwrap();
    assert!(check.mismatches.is_empty(), "{:?}", check.mismatches);
    assert_eq!(check.bad, 0);
    assert!(check.computed > 0);
}

#[test]
fn u_entries_are_canonical() {
    let c = curve(&[1, 1, 0, 1]);
    let ctx = FrobContext::new(&c).unwrap();
    let table = compute_u_table(&ctx, &[101, 103], 104).unwrap();
    for u in table.values() {
        let m = Integer::from(u.p).pow(ctx.mu as u32 + u.rho);
        assert!(u.coords.iter().all(|x| *x >= 0 && *x < m));
        assert_eq!(u.coords[0], 0);
        assert!(u.e <= u.rho);
    }
}
