//! Radial resolvent kernel `u(r)` of `(-Delta + lambda)^{-1}` on a model
//! manifold, its spherical sums, and closed-form oracles.
//!
//! The kernel solves `u'' + mu u' - lambda u = 0` with `A u' -> -1` at the
//! origin and `u -> 0` at infinity. It is integrated inward in `s = ln r` for
//! the state `(W, L) = (r u'/u, ln u)`, starting far enough out that the
//! growing mode has been damped below the requested contamination.

use serde::Serialize;
use thiserror::Error;

use crate::model::ModelManifold;
use crate::ode::{integrate_to_points, OdeConfig, OdeError};
use crate::quad::{hermite_cell, hermite_eval, locate};
use crate::specfun::{
    log_bessel_k, log_laplace_bessel_integral, unit_sphere_area, IntegralMode,
    LaplaceIntegralParams, SpecFunError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResolventError {
    #[error("lambda must be positive and finite, got {0}")]
    InvalidLambda(f64),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("radial integration failed: {0}")]
    Integration(#[from] OdeError),
    #[error("small-r matching is inaccurate at r_min = {r_min}; try r_min <= {suggested}")]
    Matching { r_min: f64, suggested: f64 },
    #[error("spherical sum does not decay at r = {r} (log-slope {slope}); increase r_max")]
    NonDecayingTail { r: f64, slope: f64 },
    #[error("radius {r} is outside the solved range [{lo}, {hi}]")]
    OutOfRange { r: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub r_min: f64,
    /// Outer radius of the reported grid; `None` picks [`default_r_max`] for `r0 = 1`.
    pub r_max: Option<f64>,
    /// Number of uniform cells on `(0, r_max]`; refined so that spacing is at most `max_spacing`.
    pub grid_points: usize,
    pub max_spacing: f64,
    pub log_points_per_decade: usize,
    /// Relative size of the growing mode at `r_max`.
    pub contamination: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            r_min: 1e-4,
            r_max: None,
            grid_points: 1500,
            max_spacing: 0.02,
            log_points_per_decade: 50,
            contamination: 1e-12,
            rtol: 1e-12,
            atol: 1e-13,
        }
    }
}

/// Asymptotic decay rate of the spherical sums, `-mu/2 + sqrt(mu^2/4 + lambda)`
/// with `mu` the limit of the mean curvature.
pub fn spherical_sum_rate(mu_bar: f64, lambda: f64) -> f64 {
    -0.5 * mu_bar + (0.25 * mu_bar * mu_bar + lambda).sqrt()
}

/// Radius at which a bound decaying at the spherical-sum rate from `r0` has
/// lost fourteen decades, clamped to `[max(30, r0 + 10), 100]`.
pub fn default_r_max(model: &ModelManifold, lambda: f64, r0: f64) -> f64 {
    let rate = spherical_sum_rate(model.asymptotic_mu(), lambda);
    let target = r0 + 14.0 * std::f64::consts::LN_10 / rate;
    target.clamp(30f64.max(r0 + 10.0), 100f64.max(r0 + 10.0))
}

/// The decaying radial solution, normalized as a resolvent kernel.
#[derive(Debug, Clone)]
pub struct RadialResolvent {
    pub model: ModelManifold,
    pub lambda: f64,
    pub grid: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub log_u: Vec<f64>,
    /// `u'/u` on the grid.
    pub log_slope: Vec<f64>,
    /// `|lambda int_0^inf u A - 1|`.
    pub norm_residual: f64,
    /// Index of the first point of the uniform part of the grid.
    pub uniform_start: usize,
    pub spacing: f64,
    // Samples beyond r_max used for the tail of the spherical sums.
    pad_grid: Vec<f64>,
    pad_log_u: Vec<f64>,
    pad_log_slope: Vec<f64>,
    // lambda int_0^{r_min} u A from the small-r expansion.
    inner_mass: f64,
    sums: SphericalSums,
}

/// Spherical sums `psi_bar = A u` and extraglobular sums `Psi = -int_r^inf psi_bar`.
#[derive(Debug, Clone, Serialize)]
pub struct SphericalSums {
    pub grid: Vec<f64>,
    pub psi_bar: Vec<f64>,
    pub log_psi_bar: Vec<f64>,
    /// `psi_bar' / psi_bar`.
    pub log_slope: Vec<f64>,
    #[serde(rename = "Psi")]
    pub psi: Vec<f64>,
    /// `ln(-Psi)`.
    pub log_neg_psi: Vec<f64>,
    /// Exponential rate used to close the integral beyond the last padded sample.
    pub tail_rate: f64,
}

impl SphericalSums {
    /// Builds sums from samples of `ln psi_bar` and its log-derivative on an
    /// increasing grid, closing the tail with the last log-slope.
    pub fn from_samples(
        grid: Vec<f64>,
        log_psi_bar: Vec<f64>,
        log_slope: Vec<f64>,
    ) -> Result<Self, ResolventError> {
        let n = grid.len();
        if n < 2 || log_psi_bar.len() != n || log_slope.len() != n {
            return Err(ResolventError::InvalidConfig(
                "spherical sums need matching grids of at least two points".to_string(),
            ));
        }
        let tail_rate = -log_slope[n - 1];
        if !(tail_rate > 0.0) {
            return Err(ResolventError::NonDecayingTail {
                r: grid[n - 1],
                slope: log_slope[n - 1],
            });
        }
        // ratio_i = Psi_i / psi_bar_i, accumulated from the right without
        // forming psi_bar itself, so deep tails never underflow.
        let mut ratio = vec![0.0; n];
        ratio[n - 1] = -1.0 / tail_rate;
        for i in (0..n - 1).rev() {
            let e = (log_psi_bar[i + 1] - log_psi_bar[i]).exp();
            let cell = hermite_cell(grid[i], grid[i + 1], 1.0, log_slope[i], e, e * log_slope[i + 1]);
            ratio[i] = ratio[i + 1] * e - cell;
        }
        let log_neg_psi: Vec<f64> = ratio
            .iter()
            .zip(&log_psi_bar)
            .map(|(q, l)| (-q).ln() + l)
            .collect();
        Ok(Self {
            psi_bar: log_psi_bar.iter().map(|l| l.exp()).collect(),
            psi: log_neg_psi.iter().map(|l| -l.exp()).collect(),
            grid,
            log_psi_bar,
            log_slope,
            log_neg_psi,
            tail_rate,
        })
    }

    /// `d psi_bar / dr` on the grid.
    pub fn dpsi_bar(&self) -> Vec<f64> {
        self.psi_bar.iter().zip(&self.log_slope).map(|(p, s)| p * s).collect()
    }

    /// Cubic Hermite interpolation of `ln psi_bar` inside the grid.
    pub fn log_psi_bar_at(&self, r: f64) -> f64 {
        let i = locate(&self.grid, r);
        hermite_eval(
            self.grid[i],
            self.grid[i + 1],
            self.log_psi_bar[i],
            self.log_slope[i],
            self.log_psi_bar[i + 1],
            self.log_slope[i + 1],
            r,
        )
    }

    /// Index of the first grid point `>= r` (with a relative slack of 1e-12).
    pub fn index_at_or_after(&self, r: f64) -> usize {
        self.grid.partition_point(|&g| g < r * (1.0 - 1e-12))
    }
}

/// Euclidean Green's function singularity and its derivative.
fn flat_green(n: usize, r: f64) -> (f64, f64) {
    let c = unit_sphere_area(n);
    if n == 2 {
        (-r.ln() / c, -1.0 / (c * r))
    } else {
        let nn = n as f64;
        (r.powf(2.0 - nn) / ((nn - 2.0) * c), -r.powf(1.0 - nn) / c)
    }
}

fn build_grid(r_min: f64, r_max: f64, cfg: &SolverConfig) -> (Vec<f64>, usize, f64) {
    let refine = (r_max / (cfg.grid_points as f64 * cfg.max_spacing)).ceil().max(1.0) as usize;
    let cells = cfg.grid_points * refine;
    let h = r_max / cells as f64;
    let mut grid = Vec::new();
    let ratio = 10f64.powf(1.0 / cfg.log_points_per_decade as f64);
    // Logarithmic spacing until it is as coarse as the uniform spacing.
    let r_switch = h / (ratio - 1.0);
    let mut r = r_min;
    while r < r_switch && r < r_max {
        grid.push(r);
        r *= ratio;
    }
    let uniform_start = grid.len();
    let last_log = grid.last().copied().unwrap_or(0.0);
    let j0 = ((last_log / h) + 0.5).ceil().max(1.0) as usize;
    grid.extend((j0..=cells).map(|j| (r_max * j as f64) / cells as f64));
    (grid, uniform_start, h)
}

/// Solves for the resolvent kernel of `model` at spectral parameter `lambda`.
pub fn solve_radial(
    model: &ModelManifold,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<RadialResolvent, ResolventError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(ResolventError::InvalidLambda(lambda));
    }
    let r_max = cfg.r_max.unwrap_or_else(|| default_r_max(model, lambda, 1.0));
    let r_min = cfg.r_min;
    if !(r_min > 0.0 && r_max > 10.0 * r_min && cfg.grid_points >= 2) {
        return Err(ResolventError::InvalidConfig(format!(
            "need 0 < 10 r_min < r_max and grid_points >= 2 (r_min = {r_min}, r_max = {r_max})"
        )));
    }
    let scale = lambda.sqrt() + model.excess(r_min).abs() / r_min;
    if r_min * r_min * (lambda + model.excess(r_min).abs() / r_min) > 1e-4 {
        return Err(ResolventError::Matching {
            r_min,
            suggested: 1e-3 / scale,
        });
    }
    let n = model.n();
    let nf = n as f64;

    let (grid, uniform_start, h) = build_grid(r_min, r_max, cfg);
    let mu_max = model.mu(r_max);
    let gap = 2.0 * (0.25 * mu_max * mu_max + lambda).sqrt();
    let pad = (1.0 / cfg.contamination).ln() / gap;
    let pad_cells = (pad / h).ceil() as usize;
    let pad_grid: Vec<f64> = (1..=pad_cells).map(|j| r_max + h * j as f64).collect();
    let r_start = *pad_grid.last().unwrap_or(&r_max);

    let rhs = |s: f64, y: &[f64; 2]| -> [f64; 2] {
        let r = s.exp();
        let w = y[0];
        [
            w * ((2.0 - nf) - r * model.excess(r)) - w * w + lambda * r * r,
            w,
        ]
    };
    let mu_start = model.mu(r_start);
    let sigma_minus = -0.5 * mu_start - (0.25 * mu_start * mu_start + lambda).sqrt();
    let y0 = [r_start * sigma_minus, 0.0];
    let outputs: Vec<f64> = pad_grid.iter().rev().chain(grid.iter().rev()).map(|r| r.ln()).collect();
    let ode_cfg = OdeConfig {
        rtol: cfg.rtol,
        atol: cfg.atol,
        ..OdeConfig::default()
    };
    let states = integrate_to_points(rhs, r_start.ln(), y0, &outputs, &ode_cfg)?;
    let m_pad = pad_grid.len();
    let at = |i: usize| states[m_pad + grid.len() - 1 - i];
    let pad_at = |j: usize| states[m_pad - 1 - j];

    // Match u ~ a G + b at r_min and fix the scale from A u' -> -1.
    let s0 = at(0);
    let w0 = s0[0] / r_min;
    let log_area0 = model.log_area(r_min);
    let (g, dg) = flat_green(n, r_min);
    let b_over_a = dg / w0 - g;
    // a / |A u'| with u normalized to one at r_min
    let a_over_flux = (unit_sphere_area(n).ln() + (nf - 1.0) * r_min.ln() - log_area0).exp();
    let c = unit_sphere_area(n);
    let shape = if n == 2 {
        r_min * r_min * (0.25 - 0.5 * r_min.ln()) + std::f64::consts::PI * b_over_a * r_min * r_min
    } else {
        r_min * r_min / (2.0 * (nf - 2.0)) + b_over_a * c * r_min.powi(n as i32) / nf
    };
    let inner_ratio = lambda * a_over_flux * shape;
    let log_abs_flux_raw = log_area0 + (-w0).ln() + s0[1];
    if !(w0 < 0.0) {
        return Err(ResolventError::Matching {
            r_min,
            suggested: r_min / 10.0,
        });
    }
    let log_c = -(log_abs_flux_raw + inner_ratio.ln_1p());
    let inner_mass = inner_ratio / (1.0 + inner_ratio);

    let log_u: Vec<f64> = (0..grid.len()).map(|i| at(i)[1] + log_c).collect();
    let log_slope: Vec<f64> = (0..grid.len()).map(|i| at(i)[0] / grid[i]).collect();
    let u: Vec<f64> = log_u.iter().map(|l| l.exp()).collect();
    let du: Vec<f64> = u.iter().zip(&log_slope).map(|(u, w)| u * w).collect();
    let pad_log_u: Vec<f64> = (0..m_pad).map(|j| pad_at(j)[1] + log_c).collect();
    let pad_log_slope: Vec<f64> = (0..m_pad).map(|j| pad_at(j)[0] / pad_grid[j]).collect();

    // Spherical sums over grid + padding, then restricted to the grid.
    let full_grid: Vec<f64> = grid.iter().chain(&pad_grid).copied().collect();
    let full_log_psi: Vec<f64> = full_grid
        .iter()
        .zip(log_u.iter().chain(&pad_log_u))
        .map(|(&r, l)| model.log_area(r) + l)
        .collect();
    let full_slope: Vec<f64> = full_grid
        .iter()
        .zip(log_slope.iter().chain(&pad_log_slope))
        .map(|(&r, w)| model.mu(r) + w)
        .collect();
    let mut sums = SphericalSums::from_samples(full_grid, full_log_psi, full_slope)?;
    let keep = grid.len();
    sums.grid.truncate(keep);
    sums.psi_bar.truncate(keep);
    sums.log_psi_bar.truncate(keep);
    sums.log_slope.truncate(keep);
    sums.psi.truncate(keep);
    sums.log_neg_psi.truncate(keep);

    let norm_residual = (lambda * (-sums.psi[0]) + inner_mass - 1.0).abs();

    Ok(RadialResolvent {
        model: model.clone(),
        lambda,
        grid,
        u,
        du,
        log_u,
        log_slope,
        norm_residual,
        uniform_start,
        spacing: h,
        pad_grid,
        pad_log_u,
        pad_log_slope,
        inner_mass,
        sums,
    })
}

impl RadialResolvent {
    pub fn r_min(&self) -> f64 {
        self.grid[0]
    }

    pub fn r_max(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    /// Spherical and extraglobular sums on the grid.
    pub fn spherical_sums(&self) -> &SphericalSums {
        &self.sums
    }

    /// `lambda int_0^{r_min} u A`, from the small-r expansion.
    pub fn inner_mass(&self) -> f64 {
        self.inner_mass
    }

    /// `ln u(r)` by cubic Hermite interpolation in `(ln u, u'/u)`.
    pub fn log_u_at(&self, r: f64) -> Result<f64, ResolventError> {
        let (lo, hi) = (self.r_min(), self.r_max());
        if !(r >= lo && r <= hi) {
            return Err(ResolventError::OutOfRange { r, lo, hi });
        }
        let i = locate(&self.grid, r);
        Ok(hermite_eval(
            self.grid[i],
            self.grid[i + 1],
            self.log_u[i],
            self.log_slope[i],
            self.log_u[i + 1],
            self.log_slope[i + 1],
            r,
        ))
    }

    /// `A(r) u'(r)` at grid index `i`.
    pub fn flux(&self, i: usize) -> f64 {
        -(self.model.log_area(self.grid[i]) + self.log_u[i] + (-self.log_slope[i]).ln()).exp()
    }

    /// Largest `|A u' - lambda Psi| / |lambda Psi|` over the grid, in log space.
    pub fn flux_identity_residual(&self) -> f64 {
        let sums = &self.sums;
        (0..self.grid.len())
            .map(|i| {
                let log_flux = self.model.log_area(self.grid[i]) + self.log_u[i] + (-self.log_slope[i]).ln();
                let log_target = self.lambda.ln() + sums.log_neg_psi[i];
                (log_flux - log_target).exp_m1().abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest relative residual of `u'' + mu u' - lambda u` over interior
    /// grid points. With `W = r u'/u`, `u''/u = (dW/dr - W/r + W^2/r) / r`,
    /// and `dW/dr` comes from fourth-order central differences of the
    /// sampled `W` (in `ln r` on the logarithmic part, in `r` on the uniform part).
    pub fn ode_residual(&self) -> f64 {
        let big_w: Vec<f64> = self.grid.iter().zip(&self.log_slope).map(|(r, w)| r * w).collect();
        let fd = |i: usize, step: f64| {
            (-big_w[i + 2] + 8.0 * big_w[i + 1] - 8.0 * big_w[i - 1] + big_w[i - 2]) / (12.0 * step)
        };
        let log_step = (self.grid[1] / self.grid[0]).ln();
        let mut worst: f64 = 0.0;
        let mut check = |i: usize, dw_dr: f64| {
            let r = self.grid[i];
            let w = self.log_slope[i];
            let second = (dw_dr - w + big_w[i] * w) / r;
            let mu_term = self.model.mu(r) * w;
            let res = second + mu_term - self.lambda;
            let scale = second.abs() + mu_term.abs() + self.lambda;
            worst = worst.max(res.abs() / scale);
        };
        for i in 2..self.uniform_start.saturating_sub(2) {
            check(i, fd(i, log_step) / self.grid[i]);
        }
        for i in self.uniform_start + 2..self.grid.len().saturating_sub(2) {
            check(i, fd(i, self.spacing));
        }
        worst
    }

    /// Samples beyond `r_max` that were used to close the spherical sums.
    pub fn padding(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.pad_grid, &self.pad_log_u, &self.pad_log_slope)
    }
}

/// `ln` of the Euclidean kernel `(4 pi)^{-n/2} 2 (2 sqrt(lambda)/r)^{n/2-1} K_{n/2-1}(sqrt(lambda) r)`.
pub fn log_closed_form_euclidean(n: usize, lambda: f64, r: f64) -> Result<f64, SpecFunError> {
    let nu = n as f64 / 2.0 - 1.0;
    Ok(-(n as f64 / 2.0) * (4.0 * std::f64::consts::PI).ln()
        + std::f64::consts::LN_2
        + nu * (2.0 * lambda.sqrt() / r).ln()
        + log_bessel_k(nu, lambda.sqrt() * r)?)
}

pub fn closed_form_euclidean(n: usize, lambda: f64, r: f64) -> Result<f64, SpecFunError> {
    Ok(log_closed_form_euclidean(n, lambda, r)?.exp())
}

/// `ln` of the `H^3` kernel `e^{-sqrt(1+lambda) r} / (4 pi sinh r)`.
pub fn log_closed_form_hyperbolic3(lambda: f64, r: f64) -> f64 {
    let log_sinh = if r > 20.0 {
        r - std::f64::consts::LN_2 + (-(-2.0 * r).exp()).ln_1p()
    } else {
        r.sinh().ln()
    };
    -(1.0 + lambda).sqrt() * r - (4.0 * std::f64::consts::PI).ln() - log_sinh
}

pub fn closed_form_hyperbolic3(lambda: f64, r: f64) -> f64 {
    log_closed_form_hyperbolic3(lambda, r).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatKernelKind {
    Euclidean { n: usize },
    Hyperbolic3,
}

/// `int_0^inf e^{-lambda t} p(r, t) dt` by adaptive quadrature of the exact heat kernel.
pub fn laplace_transform_heat_kernel(
    kind: HeatKernelKind,
    lambda: f64,
    r: f64,
) -> Result<f64, SpecFunError> {
    let four_pi = 4.0 * std::f64::consts::PI;
    let beta = 0.25 * r * r;
    let log_value = match kind {
        HeatKernelKind::Euclidean { n } => {
            let p = LaplaceIntegralParams::new(lambda, beta, n as f64 / 2.0)?;
            -(n as f64 / 2.0) * four_pi.ln() + log_laplace_bessel_integral(&p, IntegralMode::Quadrature)?
        }
        HeatKernelKind::Hyperbolic3 => {
            // p = (4 pi t)^{-3/2} (r / sinh r) e^{-t - r^2/(4t)}
            let p = LaplaceIntegralParams::new(lambda + 1.0, beta, 1.5)?;
            -1.5 * four_pi.ln() + (r / r.sinh()).ln()
                + log_laplace_bessel_integral(&p, IntegralMode::Quadrature)?
        }
    };
    Ok(log_value.exp())
}

/// Comparison of a hyperbolic-space kernel with the two-sided shape
/// `r^{1/2} (1 + 1/r)^{m/2} s^{(m-1)/2} e^{-m r/2} K_{(m-1)/2}(s r) + (1 + 1/r) e^{-(m/2 + s) r}`,
/// `s = sqrt(m^2/4 + lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoSidedReport {
    pub m: u32,
    pub lambda: f64,
    /// `min u / shape` over `[1, r_max]`.
    pub lower_constant: f64,
    /// `max u / shape` over `[1, r_max]`.
    pub upper_constant: f64,
    pub constant_ratio: f64,
    /// Negated log-slope of `u` fitted on the outer part of the range.
    pub fitted_slope: f64,
    pub expected_slope: f64,
    pub pass: bool,
}

/// `ln` of the two-sided shape above.
pub fn log_two_sided_shape(m: u32, lambda: f64, r: f64) -> Result<f64, SpecFunError> {
    let mf = m as f64;
    let s = (0.25 * mf * mf + lambda).sqrt();
    let first = 0.5 * r.ln() + 0.5 * mf * (1.0 / r).ln_1p() + 0.5 * (mf - 1.0) * s.ln() - 0.5 * mf * r
        + log_bessel_k(0.5 * (mf - 1.0), s * r)?;
    let second = (1.0 / r).ln_1p() - (0.5 * mf + s) * r;
    let hi = first.max(second);
    Ok(hi + ((first - hi).exp() + (second - hi).exp()).ln())
}

/// Checks a kernel on `H^{m+1}` against the two-sided shape with fitted
/// constants and its limiting log-slope `m/2 + sqrt(m^2/4 + lambda)`.
pub fn hyperbolic_twosided_check(
    m: u32,
    lambda: f64,
    res: &RadialResolvent,
) -> Result<TwoSidedReport, ResolventError> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &r) in res.grid.iter().enumerate() {
        if r < 1.0 {
            continue;
        }
        let d = res.log_u[i] - log_two_sided_shape(m, lambda, r)?;
        lo = lo.min(d);
        hi = hi.max(d);
    }
    let mf = m as f64;
    let expected = 0.5 * mf + (0.25 * mf * mf + lambda).sqrt();
    let r_b = res.r_max();
    let r_a = (r_b - 15.0).max(0.5 * r_b);
    let xs: Vec<f64> = res.grid.iter().copied().filter(|&r| r >= r_a && r <= r_b).collect();
    let ys: Vec<f64> = res
        .grid
        .iter()
        .zip(&res.log_u)
        .filter(|(r, _)| **r >= r_a && **r <= r_b)
        .map(|(_, l)| -l)
        .collect();
    let fitted = least_squares_slope(&xs, &ys);
    let (lower, upper) = (lo.exp(), hi.exp());
    Ok(TwoSidedReport {
        m,
        lambda,
        lower_constant: lower,
        upper_constant: upper,
        constant_ratio: upper / lower,
        fitted_slope: fitted,
        expected_slope: expected,
        pass: lower > 0.0 && upper.is_finite() && ((fitted - expected) / expected).abs() < 1e-2,
    })
}

pub(crate) fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn solve(model: &ModelManifold, lambda: f64, r_max: f64) -> RadialResolvent {
        let cfg = SolverConfig {
            r_max: Some(r_max),
            ..SolverConfig::default()
        };
        solve_radial(model, lambda, &cfg).unwrap()
    }

    #[test]
    fn yukawa_kernel_in_three_dimensions() {
        let res = solve(&ModelManifold::euclidean(3).unwrap(), 1.0, 30.0);
        let i = res.grid.iter().position(|&r| r == 2.0).unwrap();
        let exact = (-2.0f64).exp() / (8.0 * PI);
        assert!((res.u[i] / exact - 1.0).abs() < 1e-8);
        assert!((res.u[i] - 0.005_384_82).abs() < 1e-8);
        assert!(res.norm_residual < 1e-8);
    }

    #[test]
    fn hyperbolic_kernel_in_three_dimensions() {
        let res = solve(&ModelManifold::constant_curvature(3, 1.0).unwrap(), 1.0, 30.0);
        for (i, &r) in res.grid.iter().enumerate() {
            if (0.1..=20.0).contains(&r) {
                let exact = log_closed_form_hyperbolic3(1.0, r);
                assert!((res.log_u[i] - exact).abs() < 1e-8, "r={r}");
            }
        }
        assert!((closed_form_hyperbolic3(1.0, 2.0) - 0.001_296_85).abs() < 1e-8);
    }

    #[test]
    fn two_dimensional_kernel() {
        let res = solve(&ModelManifold::euclidean(2).unwrap(), 1.0, 30.0);
        let i = res.grid.iter().position(|&r| r == 1.0).unwrap();
        let exact = closed_form_euclidean(2, 1.0, 1.0).unwrap();
        assert!((exact - 0.067_008_12).abs() < 1e-8);
        assert!((res.u[i] / exact - 1.0).abs() < 1e-8);
        assert!(res.norm_residual < 1e-8);
    }

    #[test]
    fn euclidean_closed_form_reduces_to_yukawa() {
        for &r in &[0.3, 2.0, 11.0] {
            let v = closed_form_euclidean(3, 2.0, r).unwrap();
            let y = (-(2f64.sqrt()) * r).exp() / (4.0 * PI * r);
            assert!((v / y - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn heat_kernel_transforms() {
        let e = laplace_transform_heat_kernel(HeatKernelKind::Euclidean { n: 3 }, 1.0, 2.0).unwrap();
        assert!((e / closed_form_euclidean(3, 1.0, 2.0).unwrap() - 1.0).abs() < 1e-8);
        let h = laplace_transform_heat_kernel(HeatKernelKind::Hyperbolic3, 1.0, 2.0).unwrap();
        assert!((h / closed_form_hyperbolic3(1.0, 2.0) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn spherical_sums_of_yukawa() {
        let res = solve(&ModelManifold::euclidean(3).unwrap(), 1.0, 30.0);
        let sums = res.spherical_sums();
        for (i, &r) in sums.grid.iter().enumerate() {
            if r > 0.01 && r < 25.0 {
                assert!((sums.psi_bar[i] / (r * (-r).exp()) - 1.0).abs() < 1e-8);
                assert!((sums.psi[i] / (-(r + 1.0) * (-r).exp()) - 1.0).abs() < 1e-8, "r={r}");
            }
        }
        let i = res.grid.iter().position(|&r| r == 1.0).unwrap();
        assert!((res.flux(i) + 2.0 / std::f64::consts::E).abs() < 1e-8);
        assert!((res.flux(0) + 1.0).abs() < 1e-6);
    }

    #[test]
    fn flux_and_ode_residuals_are_small() {
        for model in [
            ModelManifold::constant_curvature(5, 1.0).unwrap(),
            ModelManifold::damek_ricci(2, 1).unwrap(),
        ] {
            for &lambda in &[0.1, 10.0] {
                let res = solve(&model, lambda, 40.0);
                assert!(res.flux_identity_residual() < 1e-6, "{}", model.label());
                assert!(res.ode_residual() < 1e-6, "{} {}", model.label(), res.ode_residual());
                assert!(res.norm_residual < 1e-6);
                assert!(res.du.iter().all(|d| *d < 0.0));
            }
        }
    }

    #[test]
    fn matching_failure_suggests_smaller_r_min() {
        let cfg = SolverConfig {
            r_min: 0.05,
            r_max: Some(30.0),
            ..SolverConfig::default()
        };
        match solve_radial(&ModelManifold::euclidean(3).unwrap(), 10.0, &cfg) {
            Err(ResolventError::Matching { suggested, .. }) => assert!(suggested < 0.05),
            other => panic!("expected matching error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_nonpositive_lambda() {
        let m = ModelManifold::euclidean(3).unwrap();
        assert!(solve_radial(&m, 0.0, &SolverConfig::default()).is_err());
    }

    #[test]
    fn two_sided_shape_for_h3() {
        let res = solve(&ModelManifold::constant_curvature(3, 1.0).unwrap(), 1.0, 40.0);
        let rep = hyperbolic_twosided_check(2, 1.0, &res).unwrap();
        assert!((rep.expected_slope - (1.0 + 2f64.sqrt())).abs() < 1e-14);
        assert!(rep.pass, "{rep:?}");
        assert!(rep.constant_ratio < 10.0);
    }

    #[test]
    fn default_r_max_is_clamped() {
        let e = ModelManifold::euclidean(3).unwrap();
        assert_eq!(default_r_max(&e, 0.01, 1.0), 100.0);
        assert_eq!(default_r_max(&e, 10.0, 1.0), 30.0);
    }
}
