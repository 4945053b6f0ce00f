//! Cross-module consistency checks: contour families against each other,
//! kernel asymptotics against the symbol's edge exponents, operator
//! identities, and the structural contracts of the solver outputs.

use fracevo::{
    g_eval, g_jet, gamma, h_derivative_apply, hille_yosida_check, invert_scalar, k1_eval,
    k2_eval, resolvent_apply, semigroup_apply, solve_resolvent, solve_subordination,
    solve_volterra, ContourSpec, Generator, ProblemKind, WeightSpec,
};
use num_complex::Complex64;
use std::f64::consts::PI;

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn contour_families_cross_validate() {
    // exp(-sqrt(s))/sqrt(s) inverts to exp(-1/4t)/sqrt(pi t); every contour
    // family must land on it and on each other.
    let f = |s: Complex64| (-s.sqrt()).exp() / s.sqrt();
    for t in [0.5f64, 2.0] {
        let want = (-0.25 / t).exp() / (PI * t).sqrt();
        let talbot24 = invert_scalar(f, t, &ContourSpec::FixedTalbot { nodes: 24 }).unwrap();
        let talbot48 = invert_scalar(f, t, &ContourSpec::FixedTalbot { nodes: 48 }).unwrap();
        let bromwich = invert_scalar(
            f,
            t,
            &ContourSpec::BromwichLine {
                abscissa: 4.0 / t,
                halfheight: 1800.0,
                nodes: 16384,
            },
        )
        .unwrap();
        let hankel = invert_scalar(
            f,
            t,
            &ContourSpec::HankelSector {
                rho: 1.0 / t,
                theta: 5.0 * PI / 6.0,
                arc_nodes: 48,
                ray_nodes: 96,
                ray_cutoff: 36.0,
            },
        )
        .unwrap();
        for (name, got) in [
            ("talbot24", talbot24),
            ("talbot48", talbot48),
            ("bromwich", bromwich),
            ("hankel", hankel),
        ] {
            let rel = (got - want).abs() / want;
            assert!(rel < 1e-9, "{name} at t={t}: rel dev {rel:.3e}");
        }
    }
}

#[test]
fn talbot_node_doubling_is_stable() {
    let w: WeightSpec = "discrete:0.7,0.2:1.5".parse().unwrap();
    let h = |s: Complex64| {
        let g = g_eval(&w, ProblemKind::Caputo, s).unwrap();
        (g / s) / (g + 1.0)
    };
    for t in [0.1, 1.0, 10.0] {
        let coarse = invert_scalar(h, t, &ContourSpec::FixedTalbot { nodes: 24 }).unwrap();
        let fine = invert_scalar(h, t, &ContourSpec::FixedTalbot { nodes: 48 }).unwrap();
        let rel = (coarse - fine).abs() / fine.abs();
        assert!(rel < 1e-9, "t={t}: 24 vs 48 nodes differ by {rel:.3e}");
    }
}

fn log_slope(f: impl Fn(f64) -> f64, t0: f64, t1: f64) -> f64 {
    (f(t1).ln() - f(t0).ln()) / (t1.ln() - t0.ln())
}

#[test]
fn discrete_kernels_decay_at_spectral_edges() {
    // Short-time behavior is set by the leading exponent, long-time by the
    // smallest one: k1 ~ t^{alpha-1} resp. t^{alpha_m - 1}, k2 the mirror.
    let w: WeightSpec = "discrete:0.6,0.2:0.5".parse().unwrap();
    let k1 = |t: f64| k1_eval(&w, t).unwrap();
    let k2 = |t: f64| k2_eval(&w, t).unwrap();
    assert!((log_slope(k1, 1e-6, 1e-4) - (0.6 - 1.0)).abs() < 0.02);
    assert!((log_slope(k1, 1e4, 1e6) - (0.2 - 1.0)).abs() < 0.02);
    assert!((log_slope(k2, 1e-6, 1e-4) - (-0.6)).abs() < 0.02);
    assert!((log_slope(k2, 1e4, 1e6) - (-0.2)).abs() < 0.02);
    // Long-time amplitude: k1 ~ t^{alpha_m - 1}/(b_m Gamma(alpha_m)).
    let t = 1e6f64;
    let ratio = k1(t) / (t.powf(-0.8) / (0.5 * gamma(0.2).unwrap()));
    assert!((ratio - 1.0).abs() < 0.05, "amplitude ratio {ratio}");
}

#[test]
fn constant_weight_kernels_follow_log_asymptotics() {
    // For the uniform density, k1(t) ~ 1/t and k2(t) ~ 1/log t at large t.
    let w = WeightSpec::Constant;
    for t in [1e4f64, 1e6] {
        let a = t * k1_eval(&w, t).unwrap();
        assert!((0.999..=1.0001).contains(&a), "t*k1 = {a} at t={t}");
        let b = t.ln() * k2_eval(&w, t).unwrap();
        assert!((0.85..=1.0).contains(&b), "k2*ln t = {b} at t={t}");
    }
    let k2 = |t: f64| k2_eval(&w, t).unwrap();
    assert!(k2(1e4) > k2(1e5) && k2(1e5) > k2(1e6));
}

#[test]
fn semigroup_and_resolvent_identities() {
    let op = Generator::DirichletLaplacian1D { n: 12, spacing: 0.7 };
    let a: Vec<f64> = (0..12).map(|i| 1.0 + 0.3 * (i as f64).sin()).collect();
    let direct = semigroup_apply(&op, 1.0, &a).unwrap();
    let staged = semigroup_apply(&op, 0.6, &semigroup_apply(&op, 0.4, &a).unwrap()).unwrap();
    for (x, y) in direct.iter().zip(&staged) {
        assert!((x - y).abs() < 1e-12);
    }
    assert!(norm2(&direct) <= norm2(&a));

    // First resolvent identity R(z1) - R(z2) = (z2 - z1) R(z1) R(z2).
    let ac: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let z1 = Complex64::new(2.0, 0.0);
    let z2 = Complex64::new(5.0, 0.0);
    let r1 = resolvent_apply(&op, z1, &ac).unwrap();
    let r2 = resolvent_apply(&op, z2, &ac).unwrap();
    let r12 = resolvent_apply(&op, z1, &r2).unwrap();
    for i in 0..12 {
        let lhs = r1[i] - r2[i];
        let rhs = (z2 - z1) * r12[i];
        assert!((lhs - rhs).norm() < 1e-12, "component {i}");
    }

    let s_grid: Vec<f64> = (0..7).map(|i| 0.01 * 10f64.powf(i as f64 * 4.0 / 6.0)).collect();
    for gen in [
        Generator::Scalar { lambda: -2.0 },
        Generator::Diagonal { lambdas: vec![-0.5, -3.0, -7.0] },
        op.clone(),
    ] {
        assert!(hille_yosida_check(&gen, &s_grid, 5).unwrap().pass);
    }
}

#[test]
fn jets_reexpand_to_symbol_values() {
    let weights: [WeightSpec; 2] = [
        "discrete:0.6,0.3:0.5".parse().unwrap(),
        "constant".parse().unwrap(),
    ];
    for w in &weights {
        for kind in [ProblemKind::Caputo, ProblemKind::RiemannLiouville] {
            let jet = g_jet(w, kind, 2.0, 8).unwrap();
            for x in [1.95, 2.05] {
                let want = g_eval(w, kind, Complex64::new(x, 0.0)).unwrap().re;
                let got = jet.eval(x);
                assert!(
                    ((got - want) / want).abs() < 1e-9,
                    "{w} {kind} at {x}: jet {got}, symbol {want}"
                );
            }
            // Taylor shift is an exact polynomial identity.
            let shifted = jet.re_expand(2.2);
            let dev = (shifted.eval(2.15) - jet.eval(2.15)).abs() / jet.eval(2.15).abs();
            assert!(dev < 1e-12);
        }
    }
}

#[test]
fn caputo_symbol_at_unit_point_carries_total_mass() {
    let one = Complex64::new(1.0, 0.0);
    let w: WeightSpec = "discrete:0.6,0.2:0.5".parse().unwrap();
    assert!((g_eval(&w, ProblemKind::Caputo, one).unwrap().re - 1.5).abs() < 1e-14);
    let c = WeightSpec::Constant;
    assert!((g_eval(&c, ProblemKind::Caputo, one).unwrap().re - 1.0).abs() < 1e-12);
    let p = WeightSpec::Poly { coeffs: vec![1.0, 1.0] };
    assert!((g_eval(&p, ProblemKind::Caputo, one).unwrap().re - 1.5).abs() < 1e-12);
}

#[test]
fn transform_derivative_bound_on_matrix_generator() {
    let op = Generator::DirichletLaplacian1D { n: 8, spacing: 1.0 };
    let a = vec![1.0; 8];
    let scale = norm2(&a);
    let weights: [WeightSpec; 3] = [
        "discrete:0.5".parse().unwrap(),
        "discrete:0.6,0.3:0.5".parse().unwrap(),
        "constant".parse().unwrap(),
    ];
    for w in &weights {
        for kind in [ProblemKind::Caputo, ProblemKind::RiemannLiouville] {
            for s in [0.6f64, 1.9] {
                let mut bound = scale / s;
                for n in 1..=8usize {
                    bound *= n as f64 / s;
                    let hn = h_derivative_apply(w, kind, &op, &a, s, n).unwrap();
                    let ratio = norm2(&hn) / bound;
                    assert!(ratio <= 1.0 + 1e-9, "{w} {kind} s={s} n={n}: ratio {ratio}");
                }
            }
        }
    }
}

#[test]
fn solution_grids_prepend_initial_state() {
    let w: WeightSpec = "discrete:0.5".parse().unwrap();
    let op = Generator::Scalar { lambda: -1.0 };
    let a = [0.75];
    let times = [0.3, 0.9];
    let contour = ContourSpec::default_talbot();
    let res = solve_resolvent(&w, ProblemKind::Caputo, &op, &a, &times, &contour).unwrap();
    let sub = solve_subordination(&w, ProblemKind::Caputo, &op, &a, &times).unwrap();
    let vol = solve_volterra(&w, ProblemKind::Caputo, &op, &a, 0.9, 8).unwrap();
    for tr in [&res, &sub, &vol] {
        assert_eq!(tr.times[0], 0.0);
        assert_eq!(tr.states[0], a.to_vec());
    }
    assert_eq!(res.times[1..], times);
    let theta = res.theta0.unwrap();
    assert!((theta - (PI / 2.0 - 0.01)).abs() < 1e-14);
    let cw = WeightSpec::Constant;
    let c = solve_resolvent(&cw, ProblemKind::Caputo, &op, &a, &times, &contour).unwrap();
    assert!(c.theta0.is_none());
}

#[test]
fn stepper_order_and_classical_limit() {
    // Near the first-order edge the equation is u' = lambda u.
    let op = Generator::Scalar { lambda: -1.0 };
    let w999 = WeightSpec::Discrete { alpha: 0.999, terms: vec![] };
    let vol = solve_volterra(&w999, ProblemKind::Caputo, &op, &[1.0], 1.0, 512).unwrap();
    let err = (vol.states.last().unwrap()[0] - (-1.0f64).exp()).abs();
    assert!(err < 5e-3, "classical-limit deviation {err:.3e}");

    let w: WeightSpec = "discrete:0.7".parse().unwrap();
    let reference = solve_resolvent(
        &w,
        ProblemKind::Caputo,
        &op,
        &[1.0],
        &[1.0],
        &ContourSpec::default_talbot(),
    )
    .unwrap()
    .states[1][0];
    let err_at = |steps: usize| {
        let tr = solve_volterra(&w, ProblemKind::Caputo, &op, &[1.0], 1.0, steps).unwrap();
        (tr.states.last().unwrap()[0] - reference).abs()
    };
    assert!(err_at(512) < err_at(128), "refinement must reduce the error");
}
