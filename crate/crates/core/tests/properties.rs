use std::str::FromStr;

use canard::engine::{expand, PMonomial, ProblemSpec};
use canard::psi::PsiTable;
use canard::term_algebra::raw::{normalize_into, u_to_raw};
use canard::term_algebra::{ExactConst, FormalSeries, Rat, RawSum, RawTerm};
use num_rational::BigRational;
use proptest::prelude::*;

fn exact_const() -> impl Strategy<Value = ExactConst> {
    let term = (-20i64..=20, 1i64..=12, 1i64..=3, -2i32..=2)
        .prop_map(|(n, d, g, e)| ExactConst::from_ratio(n, d) * ExactConst::gamma_pow(Rat::new(g, 4), e));
    prop::collection::vec(term, 1..4).prop_map(|ts| ts.into_iter().fold(ExactConst::zero(), |a, b| a + b))
}

/// Raw terms t^i ψ_k(t/η) η^l with l >= 0, so every bracket lands at a
/// nonnegative order.
fn raw_sum(p: u32) -> impl Strategy<Value = RawSum> {
    let term = (-8i64..=8, 1i64..=4, 0u32..=4, prop::option::of(0..=p), 0i32..=3);
    prop::collection::vec(term, 1..6).prop_map(|ts| {
        let mut raw = RawSum::new();
        for (n, d, i, k, l) in ts {
            let c = ExactConst::from_ratio(n, d);
            raw.push(match k {
                Some(k) => RawTerm::with_psi(c, i, k, l),
                None => RawTerm::slow(c, i, l),
            });
        }
        raw
    })
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-10 * scale.max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn exact_const_additive_inverse(a in exact_const()) {
        prop_assert!((a.clone() + (-a)).is_zero());
    }

    #[test]
    fn exact_const_display_round_trips(a in exact_const()) {
        let back = ExactConst::from_str(&a.to_string()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn exact_const_ring_matches_floats(a in exact_const(), b in exact_const()) {
        let (x, y) = (a.to_f64(), b.to_f64());
        let sum = (a.clone() + b.clone()).to_f64();
        let prod = (a.clone() * b.clone()).to_f64();
        prop_assert!(close(sum, x + y, x.abs() + y.abs()));
        prop_assert!(close(prod, x * y, (x * y).abs()));
        prop_assert_eq!(a.clone() * b.clone(), b * a);
    }

    #[test]
    fn bracket_reduction_preserves_values(
        raw in raw_sum(3),
        t in -1.0f64..1.0,
        eta in 0.1f64..0.5,
        l in prop::sample::select(vec![0u32, 2]),
    ) {
        let table = PsiTable::new(3, l, 8).unwrap();
        let mut series = FormalSeries::zero(u32::MAX);
        normalize_into(&table, &raw, &mut series).unwrap();
        let direct = raw.eval(&table, t, eta);
        let (graded, _) = series.compile().eval_u(&table, t, eta).unwrap();
        let scale: f64 = raw.iter().map(|(_, c)| c.to_f64().abs()).sum();
        prop_assert!(close(graded, direct, scale), "graded {graded} vs direct {direct}");
    }

    #[test]
    fn raw_form_round_trips_exactly(raw in raw_sum(5)) {
        let table = PsiTable::new(5, 2, 8).unwrap();
        let mut once = FormalSeries::zero(u32::MAX);
        normalize_into(&table, &raw, &mut once).unwrap();
        let mut twice = FormalSeries::zero(u32::MAX);
        normalize_into(&table, &u_to_raw(&table, &once), &mut twice).unwrap();
        prop_assert_eq!(once, twice);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn expansions_project_down(
        c0 in -3i64..=3,
        c1 in -3i64..=3,
        c2 in -3i64..=3,
        l in prop::sample::select(vec![0u32, 2]),
    ) {
        let q = |n: i64| BigRational::from_integer(n.into());
        let pm = vec![
            PMonomial { a: 0, b: 0, c: 0, d: 0, coeff: q(c0) },
            PMonomial { a: 1, b: 1, c: 0, d: 0, coeff: q(c1) },
            PMonomial { a: 2, b: 0, c: 0, d: 1, coeff: q(c2) },
        ];
        let prob = ProblemSpec::new(3, l, 2.0, 1.0, vec![], pm).unwrap();
        let high = expand(&prob, 4).unwrap();
        let low = expand(&prob, 2).unwrap();
        prop_assert_eq!(high.state.project(2), low.state);
    }
}
