//! Forward solution of `beta' = (beta - beta_-)(beta - beta_+)` from
//! `beta(r0) = beta_-(r0)`, where `beta_+-` are the roots of `b^2 + mu b - lambda`.

use serde::Serialize;

use super::BoundsError;
use crate::ode::{integrate_to_points, OdeConfig};

/// Tolerance for the monotonicity and `beta <= beta_-` checks.
pub const RICCATI_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiccatiSolution {
    pub grid: Vec<f64>,
    pub beta: Vec<f64>,
    pub beta_minus: Vec<f64>,
    pub beta_plus: Vec<f64>,
    pub lambda: f64,
    /// Largest `beta - beta_-` seen (should be <= 0 up to tolerance).
    pub max_above_root: f64,
    /// Largest decrease `beta_i - beta_{i+1}` between consecutive samples.
    pub max_decrease: f64,
}

fn roots(mu: f64, lambda: f64) -> (f64, f64) {
    let s = (0.25 * mu * mu + lambda).sqrt();
    (-0.5 * mu - s, -0.5 * mu + s)
}

/// Solves on a uniform grid of `points` samples over `[r0, r_max]`.
pub fn riccati_solve(
    mu_env: &dyn Fn(f64) -> f64,
    lambda: f64,
    r0: f64,
    r_max: f64,
    points: usize,
) -> Result<RiccatiSolution, BoundsError> {
    if !(r0 > 0.0 && r_max > r0 && points >= 2) {
        return Err(BoundsError::InvalidInput(format!(
            "need 0 < r0 < r_max and at least two points (r0 = {r0}, r_max = {r_max})"
        )));
    }
    let grid: Vec<f64> = (0..points)
        .map(|i| r0 + (r_max - r0) * i as f64 / (points - 1) as f64)
        .collect();
    riccati_solve_on(mu_env, lambda, &grid)
}

/// Solves on a caller-supplied increasing grid whose first point is `r0`.
/// Fails if the solution leaves `beta <= beta_-` or decreases by more than
/// [`RICCATI_TOL`].
pub fn riccati_solve_on(
    mu_env: &dyn Fn(f64) -> f64,
    lambda: f64,
    grid: &[f64],
) -> Result<RiccatiSolution, BoundsError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(BoundsError::InvalidInput(format!("lambda must be positive, got {lambda}")));
    }
    if grid.len() < 2 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(BoundsError::InvalidInput("grid must be strictly increasing".to_string()));
    }
    let r0 = grid[0];
    let (b0, _) = roots(mu_env(r0), lambda);
    let rhs = |r: f64, y: &[f64; 1]| {
        let (bm, bp) = roots(mu_env(r), lambda);
        [(y[0] - bm) * (y[0] - bp)]
    };
    let cfg = OdeConfig {
        rtol: 1e-12,
        atol: 1e-14,
        ..OdeConfig::default()
    };
    let states = integrate_to_points(rhs, r0, [b0], grid, &cfg)?;
    let beta: Vec<f64> = states.iter().map(|s| s[0]).collect();
    let (beta_minus, beta_plus): (Vec<f64>, Vec<f64>) =
        grid.iter().map(|&r| roots(mu_env(r), lambda)).unzip();

    let mut max_above = f64::NEG_INFINITY;
    let mut max_decrease = 0.0f64;
    for i in 0..grid.len() {
        let above = beta[i] - beta_minus[i];
        max_above = max_above.max(above);
        if above > RICCATI_TOL {
            return Err(BoundsError::InvariantViolation {
                what: "beta <= beta_-",
                r: grid[i],
                detail: format!("beta = {}, beta_- = {}", beta[i], beta_minus[i]),
            });
        }
        if i > 0 {
            let dec = beta[i - 1] - beta[i];
            max_decrease = max_decrease.max(dec);
            if dec > RICCATI_TOL {
                return Err(BoundsError::InvariantViolation {
                    what: "beta non-decreasing",
                    r: grid[i],
                    detail: format!("beta fell from {} to {}", beta[i - 1], beta[i]),
                });
            }
        }
    }
    Ok(RiccatiSolution {
        grid: grid.to_vec(),
        beta,
        beta_minus,
        beta_plus,
        lambda,
        max_above_root: max_above,
        max_decrease,
    })
}
