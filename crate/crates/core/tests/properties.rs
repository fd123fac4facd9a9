use fpboost::clairvoyant::{feasibility_residual, feasibility_solve, Feasibility};
use fpboost::eignash::eignash_iterate;
use fpboost::games::{
    approx_error, builtin, euler_step, hedge_step, relative_entropy, HedgeMode, HedgeParams, RunningAverage, Strategy as Mixed,
};
use fpboost::linops::{google_matrix, pade33_exp, truncated_exp_apply, Matrix};
use fpboost::replicator::replicator_rhs;
use proptest::prelude::*;

fn weights(n: usize) -> impl proptest::strategy::Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.01f64..1.0, n)
}

fn interior(n: usize) -> impl proptest::strategy::Strategy<Value = Mixed> {
    weights(n).prop_map(|w| Mixed::from_weights(&w).unwrap())
}

fn unit_matrix(n: usize) -> impl proptest::strategy::Strategy<Value = Matrix> {
    proptest::collection::vec(0.0f64..=1.0, n * n).prop_map(move |d| Matrix::dense(n, d).unwrap())
}

fn sized_game() -> impl proptest::strategy::Strategy<Value = (Matrix, Mixed)> {
    (2usize..7).prop_flat_map(|n| (unit_matrix(n), interior(n)))
}

/// `Γ(m+1, x) / m!` from `Γ(s+1, x) = s Γ(s, x) + x^s e^{-x}`, `Γ(1, x) = e^{-x}`.
fn upper_gamma_ratio(m: usize, x: f64) -> f64 {
    let mut g = (-x).exp();
    let mut fact = 1.0;
    for s in 1..=m {
        g = s as f64 * g + x.powi(s as i32) * (-x).exp();
        fact *= s as f64;
    }
    g / fact
}

proptest! {
    #[test]
    fn pade_tracks_exp(x in -1.0f64..=1.0) {
        prop_assert!((pade33_exp(x).unwrap() - x.exp()).abs() <= 3e-5);
    }

    #[test]
    fn partial_sum_is_scaled_incomplete_gamma(x in 0.0f64..=5.0, m in 1usize..=10) {
        let a = Matrix::dense(1, vec![x]).unwrap();
        let got = truncated_exp_apply(&a, 1.0, m, &[1.0]).unwrap()[0];
        let want = x.exp() * upper_gamma_ratio(m, x);
        prop_assert!((got - want).abs() <= 1e-12 * want.max(1.0), "{got} vs {want}");
    }

    #[test]
    fn truncated_series_is_linear(
        a in proptest::collection::vec(-1.0f64..1.0, 16),
        x in proptest::collection::vec(-1.0f64..1.0, 4),
        y in proptest::collection::vec(-1.0f64..1.0, 4),
        s in -2.0f64..2.0,
        t in -2.0f64..2.0,
        alpha in 0.1f64..2.0,
        m in 0usize..6,
    ) {
        let a = Matrix::dense(4, a).unwrap();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| s * p + t * q).collect();
        let lhs = truncated_exp_apply(&a, alpha, m, &mix).unwrap();
        let ex = truncated_exp_apply(&a, alpha, m, &x).unwrap();
        let ey = truncated_exp_apply(&a, alpha, m, &y).unwrap();
        for i in 0..4 {
            prop_assert!((lhs[i] - (s * ex[i] + t * ey[i])).abs() <= 1e-10);
        }
    }

    #[test]
    fn fixed_direction_is_inherited(d in proptest::collection::vec(0.0f64..0.9, 3), alpha in 0.1f64..3.0, m in 1usize..8) {
        // e_1 is fixed by diag(1, d...).
        let mut diag = vec![1.0];
        diag.extend(d);
        let a = Matrix::diag(&diag).unwrap();
        let x = [1.0, 0.0, 0.0, 0.0];
        let out = truncated_exp_apply(&a, alpha, m, &x).unwrap();
        let mut scale = 0.0;
        let mut term = 1.0;
        for k in 0..=m {
            if k > 0 {
                term *= alpha / k as f64;
            }
            scale += term;
        }
        prop_assert!((out[0] - scale).abs() <= 1e-10 * scale);
        prop_assert!(out[1..].iter().all(|v| v.abs() <= 1e-10));
    }

    #[test]
    fn google_columns_are_stochastic(
        n in 1usize..40,
        raw in proptest::collection::vec((0usize..1000, 0usize..1000), 0..120),
        damping in 0.0f64..=1.0,
    ) {
        let edges: Vec<(usize, usize)> = raw.into_iter().map(|(a, b)| (a % n, b % n)).collect();
        let g = google_matrix(&edges, n, damping).unwrap();
        for j in 0..n {
            let s: f64 = g.column(j).iter().sum();
            prop_assert!((s - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn hedge_modes_agree_in_safe_range((c, x) in sized_game(), alpha in 0.01f64..10.0) {
        let cx = c.matvec(x.as_slice()).unwrap();
        prop_assume!(alpha * cx.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= 20.0);
        let a = hedge_step(&c, &x, HedgeParams::new(alpha, HedgeMode::Naive).unwrap()).unwrap();
        let b = hedge_step(&c, &x, HedgeParams::new(alpha, HedgeMode::LogDomain).unwrap()).unwrap();
        for i in 0..x.len() {
            prop_assert!((a[i] - b[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn euler_step_stays_on_tangent_plane((c, x) in sized_game(), w in weights(6), alpha in 0.0f64..5.0) {
        let z = Mixed::from_weights(&w[..x.len()]).unwrap();
        let e = euler_step(&c, &x, &z, alpha).unwrap();
        prop_assert!((e.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn uniform_average_is_a_strategy(pts in proptest::collection::vec(weights(5), 1..30)) {
        let strategies: Vec<Mixed> =
            pts.iter().map(|w| Mixed::from_weights(w).unwrap()).collect();
        let mut avg = RunningAverage::new(strategies[0].as_slice());
        for s in &strategies[1..] {
            avg.push(s.as_slice());
        }
        let mean = avg.mean();
        prop_assert!((mean.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(mean.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn hedge_moves_away_from_interior_equilibrium(x in interior(3), alpha in 0.01f64..2.0) {
        let u = Mixed::uniform(3);
        prop_assume!(x.as_slice().iter().any(|v| (v - 1.0 / 3.0).abs() > 1e-6));
        let c = builtin::rps();
        let t = hedge_step(&c, &x, HedgeParams::new(alpha, HedgeMode::LogDomain).unwrap()).unwrap();
        prop_assert!(relative_entropy(&u, &t).unwrap() > relative_entropy(&u, &x).unwrap());
    }

    #[test]
    fn clairvoyant_solution_is_tangent((c, x) in sized_game(), a in 0.001f64..0.5) {
        if let Feasibility::Interior(z) = feasibility_solve(&c, &x, a).unwrap() {
            prop_assert!((z.as_slice().iter().sum::<f64>() - 1.0).abs() <= 1e-10);
            prop_assert!(feasibility_residual(&c, &x, z.as_slice(), a).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn eignash_iterates_are_strategies((c, x) in sized_game()) {
        for r in eignash_iterate(&c, &x, 3).unwrap() {
            prop_assert!((r.x.as_slice().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(r.x.as_slice().iter().all(|&v| v >= 0.0));
            prop_assert!(r.residual >= 0.0);
            prop_assert!(approx_error(&c, &r.x).unwrap() >= 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn replicator_rhs_is_tangent((c, x) in sized_game()) {
        let r = replicator_rhs(&c, &x).unwrap();
        prop_assert!(r.iter().sum::<f64>().abs() <= 1e-12);
    }

    #[test]
    fn secant_bound((c, x) in sized_game(), w in weights(6), pick in 0usize..3) {
        let alpha = [0.05, 0.5, 1.0][pick];
        let y = Mixed::from_weights(&w[..x.len()]).unwrap();
        let t = hedge_step(&c, &x, HedgeParams::new(alpha, HedgeMode::LogDomain).unwrap()).unwrap();
        let cx = c.matvec(x.as_slice()).unwrap();
        let gain: f64 = (0..x.len()).map(|i| (y[i] - x[i]) * cx[i]).sum();
        let lhs = relative_entropy(&y, &t).unwrap();
        let rhs = relative_entropy(&y, &x).unwrap() - alpha * gain + alpha * (alpha.exp() - 1.0) + 1e-10;
        prop_assert!(lhs <= rhs, "{lhs} > {rhs}");
    }
}
