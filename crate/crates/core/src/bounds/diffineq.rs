//! Weak check of `-Psi'' + mu Psi' + lambda Psi >= 0` against nonnegative
//! bump functions: `T(f) = -int Psi f'' + int mu psi_bar f + lambda int Psi f`.

use serde::Serialize;

use crate::quad::{hermite_eval, locate, GL5_NODES, GL5_WEIGHTS};
use crate::resolvent::SphericalSums;

/// Number of bumps in the standard family.
pub const MIN_BUMPS: usize = 50;

const TOL: f64 = 1e-6;
const WIDTH_FRACTIONS: [f64; 5] = [0.01, 0.04, 0.12, 0.3, 0.6];
const POSITIONS: usize = 10;

const HYPOTHESIS_NOTE: &str = "the lim inf condition on Psi at infinity is assumed, not checked; \
     it holds for resolvent kernels but not necessarily for other input data";

/// `64 t^3 (1-t)^3` on `[a, b]` with `t = (r - a)/(b - a)`; peak value 1 at the midpoint.
pub fn bump(a: f64, b: f64, r: f64) -> f64 {
    if r <= a || r >= b {
        return 0.0;
    }
    let t = (r - a) / (b - a);
    64.0 * (t * (1.0 - t)).powi(3)
}

pub fn bump_second_derivative(a: f64, b: f64, r: f64) -> f64 {
    if r <= a || r >= b {
        return 0.0;
    }
    let l = b - a;
    let t = (r - a) / l;
    384.0 * t * (1.0 - t) * (1.0 - 5.0 * t + 5.0 * t * t) / (l * l)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BumpResult {
    pub a: f64,
    pub b: f64,
    /// `T(f)` for the bump normalized to `sup f = 1`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffIneqReport {
    pub bumps: Vec<BumpResult>,
    pub min_value: f64,
    pub tol: f64,
    pub pass: bool,
    pub note: &'static str,
}

fn psi_at(sums: &SphericalSums, i: usize, r: f64) -> f64 {
    hermite_eval(
        sums.grid[i],
        sums.grid[i + 1],
        sums.psi[i],
        sums.psi_bar[i],
        sums.psi[i + 1],
        sums.psi_bar[i + 1],
        r,
    )
}

fn psi_bar_at(sums: &SphericalSums, i: usize, r: f64) -> f64 {
    hermite_eval(
        sums.grid[i],
        sums.grid[i + 1],
        sums.log_psi_bar[i],
        sums.log_slope[i],
        sums.log_psi_bar[i + 1],
        sums.log_slope[i + 1],
        r,
    )
    .exp()
}

/// `T(f)` for a test function supported in `[a, b]` inside the grid, using
/// five-point Gauss-Legendre on every grid cell the support meets.
pub fn pairing(
    sums: &SphericalSums,
    mu_env: &dyn Fn(f64) -> f64,
    lambda: f64,
    f: &dyn Fn(f64) -> f64,
    f2: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
) -> f64 {
    let mut cuts = vec![a];
    let lo = sums.grid.partition_point(|&g| g <= a);
    let hi = sums.grid.partition_point(|&g| g < b);
    cuts.extend_from_slice(&sums.grid[lo..hi]);
    cuts.push(b);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        if x1 <= x0 {
            continue;
        }
        let i = locate(&sums.grid, 0.5 * (x0 + x1));
        let (mid, half) = (0.5 * (x0 + x1), 0.5 * (x1 - x0));
        for (node, weight) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
            let x = mid + half * node;
            let psi = psi_at(sums, i, x);
            let fx = f(x);
            let integrand = -psi * f2(x) + mu_env(x) * psi_bar_at(sums, i, x) * fx + lambda * psi * fx;
            total += weight * half * integrand;
        }
    }
    total
}

/// Pairs the sums with [`MIN_BUMPS`] bumps of five widths at ten positions
/// inside `(r0, r_end)`, where `r_end` is the last grid point.
pub fn diff_ineq_check(
    sums: &SphericalSums,
    mu_env: &dyn Fn(f64) -> f64,
    lambda: f64,
    r0: f64,
) -> DiffIneqReport {
    let r_end = sums.grid[sums.grid.len() - 1];
    let span = r_end - r0;
    let mut bumps = Vec::with_capacity(MIN_BUMPS);
    if span > 0.0 {
        for frac in WIDTH_FRACTIONS {
            let w = frac * span;
            for j in 0..POSITIONS {
                let a = r0 + (span - w) * (j as f64 + 0.5) / POSITIONS as f64;
                let b = a + w;
                let value = pairing(
                    sums,
                    mu_env,
                    lambda,
                    &|r| bump(a, b, r),
                    &|r| bump_second_derivative(a, b, r),
                    a,
                    b,
                );
                bumps.push(BumpResult { a, b, value });
            }
        }
    }
    let min_value = bumps.iter().map(|b| b.value).fold(f64::INFINITY, f64::min);
    let pass = bumps.len() >= MIN_BUMPS && bumps.iter().all(|b| b.value.is_finite() && b.value >= -TOL);
    DiffIneqReport {
        bumps,
        min_value,
        tol: TOL,
        pass,
        note: HYPOTHESIS_NOTE,
    }
}
