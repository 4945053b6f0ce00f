//! Randomized properties over the admissible weight family. Each property is
//! a theorem-level guarantee, so no tolerance here is load-bearing: failures
//! mean a real defect, not an unlucky draw.

use fracevo::{
    cm_check, g_eval, g_jet, invert_scalar, k1_eval, k2_eval, mittag_leffler, postwidder_coeffs,
    sector_angle_check, solve_volterra, ContourSpec, Generator, KernelId, MLParams, ProblemKind,
    WeightSpec,
};
use num_complex::Complex64;
use proptest::prelude::*;

prop_compose! {
    /// Valid discrete weight: leading exponent in (0.15, 0.9), up to three
    /// extra atoms strictly below it with pairwise gaps of at least 0.05.
    fn discrete_weight()(
        alpha in 0.15f64..0.9,
        raw in proptest::collection::vec((0.01f64..0.99, 0.1f64..3.0), 0..=3),
    ) -> WeightSpec {
        let mut terms = Vec::new();
        let mut upper = alpha - 0.07;
        for (u, b) in raw {
            if upper <= 0.06 {
                break;
            }
            let a = 0.05 + u * (upper - 0.05);
            terms.push((a, b));
            upper = a - 0.05;
        }
        WeightSpec::Discrete { alpha, terms }
    }
}

fn kind_strategy() -> impl Strategy<Value = ProblemKind> {
    prop_oneof![
        Just(ProblemKind::Caputo),
        Just(ProblemKind::RiemannLiouville)
    ]
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sector_bound_holds_for_random_weights(
        w in discrete_weight(),
        polar in proptest::collection::vec((-3.0f64..3.0, -0.995f64..0.995), 40),
    ) {
        let samples: Vec<Complex64> = polar
            .iter()
            .map(|&(lr, f)| Complex64::from_polar(10f64.powf(lr), f * std::f64::consts::PI))
            .collect();
        let report = sector_angle_check(&w, ProblemKind::Caputo, &samples).unwrap();
        prop_assert!(report.pass, "max excess {}", report.max_excess);
    }

    #[test]
    fn grammar_round_trips_exactly(w in discrete_weight()) {
        let text = w.to_string();
        let back: WeightSpec = text.parse().unwrap();
        prop_assert_eq!(back, w);
    }

    #[test]
    fn jet_truncations_track_the_symbol(
        w in discrete_weight(),
        kind in kind_strategy(),
        s0 in 0.5f64..3.0,
        f in -0.1f64..0.1,
    ) {
        let jet = g_jet(&w, kind, s0, 8).unwrap();
        let x = s0 * (1.0 + f);
        let want = g_eval(&w, kind, Complex64::new(x, 0.0)).unwrap().re;
        let got = jet.eval(x);
        prop_assert!(
            ((got - want) / want).abs() < 1e-7,
            "jet {} vs symbol {} at {}", got, want, x
        );
    }

    #[test]
    fn derivative_table_entries_stay_nonnegative(
        w in discrete_weight(),
        kind in kind_strategy(),
        s in 0.3f64..5.0,
        n in 2usize..=12,
    ) {
        let table = postwidder_coeffs(&w, kind, s, n).unwrap();
        let scale = table.entries.values().fold(0.0f64, |m, &b| m.max(b.abs()));
        for (&(k, p), &b) in &table.entries {
            prop_assert!(b >= -1e-12 * scale, "entry ({}, {}) = {}", k, p, b);
        }
    }

    #[test]
    fn stepper_states_decay_within_unit_interval(
        w in discrete_weight(),
        kind in kind_strategy(),
        lambda in -3.0f64..-0.1,
    ) {
        // Scalar dissipative generator: the exact solution is completely
        // monotone; the product-integration scheme must stay in [0, a] and
        // decrease step over step.
        let single = WeightSpec::Discrete {
            alpha: match &w {
                WeightSpec::Discrete { alpha, .. } => *alpha,
                _ => unreachable!(),
            },
            terms: vec![],
        };
        let op = Generator::Scalar { lambda };
        let tr = solve_volterra(&single, kind, &op, &[1.0], 1.0, 64).unwrap();
        let mut prev = 1.0f64;
        for u in &tr.states[1..] {
            prop_assert!(u[0] >= -1e-12 && u[0] <= prev + 1e-9, "state {} after {}", u[0], prev);
            prev = u[0];
        }
    }

    #[test]
    fn contour_inversion_is_linear(
        a1 in 0.2f64..3.0,
        a2 in 0.2f64..3.0,
        c1 in -2.0f64..2.0,
        c2 in -2.0f64..2.0,
    ) {
        let c = ContourSpec::FixedTalbot { nodes: 32 };
        let t = 0.7;
        let f1 = |s: Complex64| 1.0 / (s + a1);
        let f2 = |s: Complex64| 1.0 / (s + a2);
        let lhs = invert_scalar(|s| c1 * f1(s) + c2 * f2(s), t, &c).unwrap();
        let parts = c1 * invert_scalar(f1, t, &c).unwrap() + c2 * invert_scalar(f2, t, &c).unwrap();
        prop_assert!((lhs - parts).abs() <= 1e-12 * (1.0 + parts.abs()));
        let oracle = c1 * (-a1 * t).exp() + c2 * (-a2 * t).exp();
        prop_assert!((lhs - oracle).abs() <= 1e-9 * (1.0 + oracle.abs()));
    }

    #[test]
    fn mittag_leffler_decreasing_in_unit_range(
        alpha in 0.05f64..=1.0,
        x1 in 0.0f64..50.0,
        gap in 0.01f64..10.0,
    ) {
        let p = MLParams::new(alpha, 1.0).unwrap();
        let lo = mittag_leffler(p, -(x1 + gap)).unwrap().value;
        let hi = mittag_leffler(p, -x1).unwrap().value;
        prop_assert!(lo > 0.0 && lo < hi + 1e-14 && hi <= 1.0 + 1e-14,
            "E({}) = {}, E({}) = {}", x1 + gap, lo, x1, hi);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn kernels_completely_monotone_for_random_weights(w in discrete_weight()) {
        let grid = logspace(1e-2, 1e2, 25);
        for id in [KernelId::K1, KernelId::K2] {
            let report = cm_check(&w, id, &grid).unwrap();
            prop_assert!(report.pass, "{:?} worst ratio {}", id, report.worst_ratio);
        }
        for &t in &grid {
            prop_assert!(k1_eval(&w, t).unwrap() > 0.0);
            prop_assert!(k2_eval(&w, t).unwrap() > 0.0);
        }
    }
}
