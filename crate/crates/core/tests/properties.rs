use proptest::prelude::*;

use resolvent_decay::bounds::{
    alpha_infinity, alpha_uniform, decay_rate, lower_bound_log, main_bound, riccati_solve,
    RICCATI_TOL,
};
use resolvent_decay::model::{comparison_mu, ModelManifold};
use resolvent_decay::resolvent::{solve_radial, SolverConfig};
use resolvent_decay::specfun::bessel_k;

fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn custom_tables_below_comparison_pass_bishop(
        n in 2usize..6,
        kappa in 0.1f64..2.0,
        gaps in prop::collection::vec(0.0f64..1.0, 3..8),
    ) {
        let table: Vec<(f64, f64)> = gaps
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let r = 0.3 * (i + 1) as f64 * (1.0 + i as f64);
                (r, comparison_mu(n, kappa, r) - g)
            })
            .collect();
        let model = ModelManifold::make_custom(n, kappa, &table).unwrap();
        let rep = model.bishop_check();
        prop_assert!(rep.pass, "{rep:?}");
        for i in 1..400 {
            let r = 0.05 * i as f64;
            prop_assert!(model.mu(r) <= model.bishop_bound(r) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn riccati_on_decreasing_profiles(
        a in 0.0f64..3.0,
        b in 0.0f64..3.0,
        lambda in 0.01f64..20.0,
        r0 in 0.2f64..3.0,
    ) {
        let mu = |r: f64| a + b * coth(r);
        let sol = riccati_solve(&mu, lambda, r0, r0 + 25.0, 400).unwrap();
        prop_assert_eq!(sol.beta[0], sol.beta_minus[0]);
        prop_assert!(sol.max_above_root <= RICCATI_TOL);
        prop_assert!(sol.max_decrease <= RICCATI_TOL);
        for i in 0..sol.grid.len() {
            prop_assert!(sol.beta_minus[i] < sol.beta_plus[i]);
        }
    }

    #[test]
    fn uniform_rate_ordering(
        n in 2usize..8,
        kappa in 0.0f64..3.0,
        lambda in 1e-4f64..100.0,
        r0 in 0.05f64..10.0,
    ) {
        let a = alpha_uniform(r0, lambda, kappa, n);
        let a_inf = alpha_infinity(lambda, kappa, n);
        prop_assert!(a > 0.0);
        prop_assert!(a <= a_inf * (1.0 + 1e-12));
        prop_assert!(alpha_uniform(r0 * 1.5, lambda, kappa, n) >= a * (1.0 - 1e-12));
        prop_assert!(a_inf <= lambda.sqrt() * (1.0 + 1e-12));
        // larger mean curvature, slower spherical-sum decay
        let mu = comparison_mu(n, kappa, r0);
        prop_assert!(decay_rate(mu * 1.1 + 0.1, lambda) <= decay_rate(mu, lambda));
    }

    #[test]
    fn bessel_recurrence(nu in 0.0f64..6.0, x in 0.05f64..40.0) {
        let km = bessel_k(nu - 1.0, x).unwrap();
        let k0 = bessel_k(nu, x).unwrap();
        let kp = bessel_k(nu + 1.0, x).unwrap();
        let rhs = km + 2.0 * nu / x * k0;
        prop_assert!((kp - rhs).abs() <= 1e-10 * kp, "nu={nu} x={x} {kp} {rhs}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn main_bound_dominates_for_random_parameters(
        lambda in 0.05f64..20.0,
        r0 in 0.3f64..4.0,
        which in 0usize..4,
    ) {
        let model = match which {
            0 => ModelManifold::euclidean(3).unwrap(),
            1 => ModelManifold::constant_curvature(4, 0.7).unwrap(),
            2 => ModelManifold::damek_ricci(2, 1).unwrap(),
            _ => ModelManifold::damek_ricci(3, 2).unwrap(),
        };
        let res = solve_radial(&model, lambda, &SolverConfig::default()).unwrap();
        prop_assert!(res.flux_identity_residual() < 1e-6);
        let b = main_bound(&res, r0).unwrap();
        let sums = res.spherical_sums();
        let off = sums.grid.len() - b.grid.len();
        for j in 1..b.grid.len() {
            prop_assert!(sums.log_psi_bar[j + off] <= b.log_envelope[j]);
            prop_assert!(b.log_envelope[j] <= b.log_uniform[j] + 1e-12);
        }
    }

    #[test]
    fn larger_kappa_gives_smaller_comparison_kernel(lambda in 0.1f64..5.0, extra in 0.1f64..2.0) {
        let model = ModelManifold::constant_curvature(3, 1.0).unwrap();
        let res = solve_radial(&model, lambda, &SolverConfig::default()).unwrap();
        for r in [0.5, 2.0, 6.0, 12.0] {
            let u = res.log_u_at(r).unwrap();
            let f = lower_bound_log(3, 1.0 + extra, lambda, r).unwrap();
            prop_assert!(f <= u);
        }
    }
}
