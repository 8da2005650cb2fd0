//! Invariant suites run by `verify`. Each check reports a measured quantity
//! and the limit it must not exceed.

use serde::Serialize;

use crate::bounds::{
    alpha_infinity, coefficient_upper_bound, comparison_volume, diff_ineq_check, expected_rate,
    lower_bound_log, main_bound, rate_fit, riccati_solve_on, RateKind, RICCATI_TOL,
};
use crate::model::ModelManifold;
use crate::resolvent::{
    closed_form_hyperbolic3, hyperbolic_twosided_check, laplace_transform_heat_kernel,
    log_closed_form_euclidean, log_closed_form_hyperbolic3, solve_radial, spherical_sum_rate,
    HeatKernelKind, RadialResolvent, SolverConfig,
};
use crate::specfun::{
    bessel_k, certify_wp_gamma, gamma_fn, incomplete_integral, incomplete_integral_shape,
    log_laplace_bessel_integral, IntegralMode, LaplaceIntegralParams, CERT_LOG10_MAX,
    CERT_LOG10_MIN, CERT_POINTS_PER_AXIS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    All,
    Model,
    Specfun,
    Resolvent,
    Bounds,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub measured: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    fn le(suite: &'static str, name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self {
            suite,
            name: name.into(),
            measured,
            limit,
            pass: measured <= limit,
        }
    }

    fn failed(suite: &'static str, name: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Self {
            suite,
            name: format!("{} ({err})", name.into()),
            measured: f64::NAN,
            limit: f64::NAN,
            pass: false,
        }
    }
}

/// Models every bounds check runs on.
pub fn preset_models() -> Vec<ModelManifold> {
    vec![
        ModelManifold::euclidean(3).expect("valid preset"),
        ModelManifold::constant_curvature(3, 1.0).expect("valid preset"),
        ModelManifold::constant_curvature(5, 1.0).expect("valid preset"),
        ModelManifold::damek_ricci(2, 1).expect("valid preset"),
    ]
}

pub fn run_suite(suite: Suite) -> Vec<Check> {
    match suite {
        Suite::All => [Suite::Model, Suite::Specfun, Suite::Resolvent, Suite::Bounds]
            .into_iter()
            .flat_map(run_suite)
            .collect(),
        Suite::Model => model_suite(),
        Suite::Specfun => specfun_suite(),
        Suite::Resolvent => resolvent_suite(),
        Suite::Bounds => bounds_suite(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn model_suite() -> Vec<Check> {
    const S: &str = "model";
    let mut out = Vec::new();
    let mut models = preset_models();
    models.push(ModelManifold::euclidean(2).expect("valid preset"));
    match ModelManifold::make_custom(
        3,
        1.0,
        &[(0.5, 2.0 / 0.5f64.tanh() - 0.1), (2.0, 2.0 / 2f64.tanh() - 0.3), (6.0, 1.6)],
    ) {
        Ok(m) => models.push(m),
        Err(e) => out.push(Check::failed(S, "custom table builds", e)),
    }
    for m in &models {
        let rep = m.bishop_check();
        out.push(Check::le(S, format!("bishop {}", m.label()), rep.max_excess, crate::model::BISHOP_TOL));
        let r = 1e-4;
        let norm = (m.density(r) / r.powi(m.n() as i32 - 1) - 1.0).abs();
        out.push(Check::le(S, format!("density ~ r^(n-1) at 0 {}", m.label()), norm, 1e-6));
        let env = m.mu_envelope(0.5, 40.0);
        let mut worst: f64 = 0.0;
        let mut prev = f64::INFINITY;
        for i in 0..=2000 {
            let s = 0.5 + 39.5 * i as f64 / 2000.0;
            let e = env.eval(s);
            worst = worst.max(m.mu(s) - e).max(e - prev * (1.0 + 1e-14));
            prev = e;
        }
        out.push(Check::le(S, format!("envelope >= mu and non-increasing {}", m.label()), worst, 0.0));
    }
    // Damek-Ricci density 2^{m+k} sinh^{m+k}(r/2) cosh^k(r/2)
    let dr = ModelManifold::damek_ricci(2, 1).expect("valid preset");
    let worst = [0.3, 1.0, 4.0, 9.0]
        .iter()
        .map(|&r: &f64| {
            let exact = 3.0 * 2f64.ln() + 3.0 * (0.5 * r).sinh().ln() + (0.5 * r).cosh().ln();
            (dr.log_density(r) - exact).abs()
        })
        .fold(0.0, f64::max);
    out.push(Check::le(S, "damek_ricci closed-form density (log)", worst, 1e-10));
    let rejected = matches!(
        dr.clone().with_kappa(4.0 / 9.0),
        Err(crate::model::ModelError::BishopViolation { .. })
    );
    out.push(Check::le(
        S,
        "damek_ricci(2,1) rejected at kappa = 4/9",
        if rejected { 0.0 } else { 1.0 },
        0.0,
    ));
    out
}

fn specfun_suite() -> Vec<Check> {
    const S: &str = "specfun";
    let mut out = Vec::new();
    out.push(Check::le(S, "Gamma(5) = 24", (gamma_fn(5.0) - 24.0).abs(), 1e-12));
    let mut worst: f64 = 0.0;
    for x in [0.01, 0.5, 1.0, 7.0, 40.0] {
        let exact = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp();
        match bessel_k(0.5, x) {
            Ok(v) => worst = worst.max(rel(v, exact)),
            Err(e) => out.push(Check::failed(S, format!("K_1/2({x})"), e)),
        }
    }
    out.push(Check::le(S, "K_1/2 closed form", worst, 1e-12));

    let mut worst: f64 = 0.0;
    for a in [0.1, 1.0, 10.0] {
        for b in [0.1, 1.0, 10.0] {
            for g in [1.0, 1.5, 3.0] {
                let p = LaplaceIntegralParams::new(a, b, g).expect("valid parameters");
                match (
                    log_laplace_bessel_integral(&p, IntegralMode::ClosedForm),
                    log_laplace_bessel_integral(&p, IntegralMode::Quadrature),
                ) {
                    (Ok(c), Ok(q)) => worst = worst.max((c - q).exp_m1().abs()),
                    (Err(e), _) | (_, Err(e)) => out.push(Check::failed(S, "Laplace-Bessel integral", e)),
                }
            }
        }
    }
    out.push(Check::le(S, "Laplace-Bessel closed form vs quadrature", worst, 1e-8));

    for g in [1.0, 1.5, 2.0, 2.5] {
        out.push(match certify_wp_gamma(g) {
            Ok(cert) => {
                let mut worst = f64::NEG_INFINITY;
                let axis: Vec<f64> = (0..CERT_POINTS_PER_AXIS)
                    .map(|i| {
                        10f64.powf(
                            CERT_LOG10_MIN
                                + (CERT_LOG10_MAX - CERT_LOG10_MIN) * i as f64 / (CERT_POINTS_PER_AXIS - 1) as f64,
                        )
                    })
                    .collect();
                for &a in &axis {
                    for &b in &axis {
                        let p = LaplaceIntegralParams::new(a, b, g).expect("valid parameters");
                        match incomplete_integral(&p) {
                            Ok(lhs) => {
                                worst = worst.max(lhs - (cert.wp_gamma.ln() + incomplete_integral_shape(&p)))
                            }
                            Err(_) => worst = f64::INFINITY,
                        }
                    }
                }
                Check::le(S, format!("certified constant dominates on grid, gamma = {g}"), worst, 0.0)
            }
            Err(e) => Check::failed(S, format!("certify gamma = {g}"), e),
        });
    }
    out
}

fn solve(model: &ModelManifold, lambda: f64) -> Result<RadialResolvent, String> {
    solve_radial(model, lambda, &SolverConfig::default()).map_err(|e| e.to_string())
}

fn resolvent_suite() -> Vec<Check> {
    const S: &str = "resolvent";
    let mut out = Vec::new();
    let flat = ModelManifold::euclidean(3).expect("valid preset");
    for lam in [0.5, 1.0, 2.0] {
        match solve(&flat, lam) {
            Ok(res) => {
                let worst = res
                    .grid
                    .iter()
                    .zip(&res.log_u)
                    .filter(|(r, _)| **r >= 0.1 && **r <= 20.0)
                    .map(|(r, l)| (l - log_closed_form_euclidean(3, lam, *r).unwrap_or(f64::NAN)).exp_m1().abs())
                    .fold(0.0, f64::max);
                out.push(Check::le(S, format!("euclidean n=3 oracle, lambda = {lam}"), worst, 1e-6));
            }
            Err(e) => out.push(Check::failed(S, format!("euclidean n=3, lambda = {lam}"), e)),
        }
    }
    let h3 = ModelManifold::constant_curvature(3, 1.0).expect("valid preset");
    match solve(&h3, 1.0) {
        Ok(res) => {
            let worst = res
                .grid
                .iter()
                .zip(&res.log_u)
                .filter(|(r, _)| **r >= 0.1 && **r <= 20.0)
                .map(|(r, l)| (l - log_closed_form_hyperbolic3(1.0, *r)).exp_m1().abs())
                .fold(0.0, f64::max);
            out.push(Check::le(S, "hyperbolic n=3 oracle, lambda = 1", worst, 1e-6));
            match hyperbolic_twosided_check(2, 1.0, &res) {
                Ok(rep) => out.push(Check::le(
                    S,
                    "hyperbolic two-sided shape rate",
                    rel(rep.fitted_slope, rep.expected_slope),
                    1e-2,
                )),
                Err(e) => out.push(Check::failed(S, "hyperbolic two-sided shape", e)),
            }
        }
        Err(e) => out.push(Check::failed(S, "hyperbolic n=3", e)),
    }
    let mut worst: f64 = 0.0;
    for r in [0.5, 2.0, 6.0] {
        match laplace_transform_heat_kernel(HeatKernelKind::Hyperbolic3, 1.0, r) {
            Ok(v) => worst = worst.max(rel(v, closed_form_hyperbolic3(1.0, r))),
            Err(e) => out.push(Check::failed(S, "heat kernel transform", e)),
        }
    }
    out.push(Check::le(S, "heat kernel Laplace transform, hyperbolic n=3", worst, 1e-8));

    for m in preset_models() {
        for lam in [0.1, 1.0, 10.0] {
            let tag = format!("{}, lambda = {lam}", m.label());
            match solve(&m, lam) {
                Ok(res) => {
                    let pos = res.log_slope.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    out.push(Check::le(S, format!("flux negative {tag}"), pos, -f64::MIN_POSITIVE));
                    out.push(Check::le(S, format!("flux identity {tag}"), res.flux_identity_residual(), 1e-6));
                    out.push(Check::le(S, format!("mass {tag}"), res.norm_residual, 1e-6));
                    out.push(Check::le(S, format!("ode residual {tag}"), res.ode_residual(), 1e-6));
                }
                Err(e) => out.push(Check::failed(S, tag, e)),
            }
        }
    }
    out
}

fn bounds_suite() -> Vec<Check> {
    const S: &str = "bounds";
    let mut out = Vec::new();
    for m in preset_models() {
        let kappa = m.kappa();
        let n = m.n();
        for lam in [0.1, 1.0, 10.0] {
            let tag = format!("{}, lambda = {lam}", m.label());
            let res = match solve(&m, lam) {
                Ok(r) => r,
                Err(e) => {
                    out.push(Check::failed(S, tag, e));
                    continue;
                }
            };
            let sums = res.spherical_sums();
            for r0 in [0.5, 1.0, 2.0] {
                match main_bound(&res, r0) {
                    Ok(b) => {
                        let off = sums.grid.len() - b.grid.len();
                        let worst = (0..b.grid.len())
                            .filter(|&j| j + off >= sums.index_at_or_after(r0))
                            .map(|j| sums.log_psi_bar[j + off] - b.log_envelope[j])
                            .fold(f64::NEG_INFINITY, f64::max);
                        out.push(Check::le(S, format!("main bound dominance {tag}, r0 = {r0}"), worst, 0.0));
                    }
                    Err(e) => out.push(Check::failed(S, format!("main bound {tag}, r0 = {r0}"), e)),
                }
                let env = m.mu_envelope(r0, res.r_max());
                let grid: Vec<f64> = (0..=2000).map(|i| r0 + (res.r_max() - r0) * i as f64 / 2000.0).collect();
                match riccati_solve_on(&|r| env.eval(r), lam, &grid) {
                    Ok(sol) => out.push(Check::le(
                        S,
                        format!("riccati monotone and below root {tag}, r0 = {r0}"),
                        sol.max_above_root.max(sol.max_decrease),
                        RICCATI_TOL,
                    )),
                    Err(e) => out.push(Check::failed(S, format!("riccati {tag}, r0 = {r0}"), e)),
                }
            }
            let env = m.mu_envelope(0.5, res.r_max());
            let rep = diff_ineq_check(sums, &|r| env.eval(r), lam, 0.5);
            out.push(Check::le(S, format!("weak differential inequality {tag}"), -rep.min_value, rep.tol));

            let a_inf = alpha_infinity(lam, kappa, n);
            let exact = spherical_sum_rate(m.asymptotic_mu(), lam);
            out.push(Check::le(S, format!("alpha_inf > 0 {tag}"), -a_inf, -f64::MIN_POSITIVE));
            out.push(Check::le(S, format!("alpha_inf <= exact rate {tag}"), (a_inf - exact) / exact, 1e-12));
        }
        for lam in [0.5, 2.0] {
            let tag = format!("{}, lambda = {lam}", m.label());
            match solve(&m, lam) {
                Ok(res) => {
                    let worst = res
                        .grid
                        .iter()
                        .zip(&res.log_u)
                        .filter(|(r, _)| **r >= 0.5 && **r <= 15.0)
                        .map(|(r, l)| lower_bound_log(n, kappa, lam, *r).map_or(f64::INFINITY, |f| f - l))
                        .fold(f64::NEG_INFINITY, f64::max);
                    out.push(Check::le(S, format!("lower bound {tag}"), worst, -(1.0 - 1e-6f64).ln()));
                }
                Err(e) => out.push(Check::failed(S, tag, e)),
            }
        }
    }
    for m in [2u32, 4] {
        let model = ModelManifold::constant_curvature(m as usize + 1, 1.0).expect("valid preset");
        for lam in [0.5, 1.0, 3.0] {
            let tag = format!("m = {m}, lambda = {lam}");
            match solve(&model, lam) {
                Ok(res) => {
                    let mf = m as f64;
                    let sums = res.spherical_sums();
                    let sum = rate_fit(&sums.grid, &sums.log_psi_bar, [10.0, 25.0]);
                    let pw = rate_fit(&res.grid, &res.log_u, [10.0, 25.0]);
                    match (sum, pw) {
                        (Ok(s), Ok(p)) => {
                            let es = expected_rate(RateKind::SphericalSum, mf, lam);
                            let ep = expected_rate(RateKind::Pointwise, mf, lam);
                            out.push(Check::le(S, format!("spherical-sum rate {tag}"), rel(s.fitted_rate, es), 1e-2));
                            out.push(Check::le(S, format!("pointwise rate {tag}"), rel(p.fitted_rate, ep), 1e-2));
                        }
                        (Err(e), _) | (_, Err(e)) => out.push(Check::failed(S, format!("rate fit {tag}"), e)),
                    }
                }
                Err(e) => out.push(Check::failed(S, tag, e)),
            }
        }
    }
    let flat = ModelManifold::euclidean(3).expect("valid preset");
    match (solve(&flat, 1.0), comparison_volume(3, 0.0, 1.0)) {
        (Ok(res), Ok(vol)) => {
            let sums = res.spherical_sums();
            for r0 in [1.0, 3.0] {
                match coefficient_upper_bound(3, 0.0, 1.0, vol, 0.0, 1.0, r0) {
                    Ok(cb) => {
                        let psi = sums.psi_bar[sums.index_at_or_after(r0)];
                        out.push(Check::le(S, format!("coefficient bound dominates psi_bar(r0), r0 = {r0}"), psi / cb.full, 1.0));
                    }
                    Err(e) => out.push(Check::failed(S, format!("coefficient bound r0 = {r0}"), e)),
                }
            }
        }
        (Err(e), _) => out.push(Check::failed(S, "coefficient bound", e)),
        (_, Err(e)) => out.push(Check::failed(S, "coefficient bound", e)),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        let checks = run_suite(Suite::All);
        let failed: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
        assert!(failed.is_empty(), "{failed:#?}");
        assert!(checks.len() > 100);
    }
}
