//! Spherical-sum upper bound `psi_bar(r) <= C exp(-int_{r0}^r rate)` and the
//! explicit coefficient bound under a volume non-collapsing condition.

use serde::Serialize;

use super::BoundsError;
use crate::model::{log_comparison_warp_power, ModelManifold, MuEnvelope, PresetTag};
use crate::quad::{integrate, QuadConfig};
use crate::resolvent::RadialResolvent;
use crate::specfun::{certify_wp_gamma, unit_sphere_area, CERT_LOG10_MAX, CERT_LOG10_MIN};

/// `-mu/2 + sqrt(mu^2/4 + lambda)`, written without cancellation for `mu > 0`.
pub fn decay_rate(mu: f64, lambda: f64) -> f64 {
    let s = (0.25 * mu * mu + lambda).sqrt();
    if mu > 0.0 {
        lambda / (0.5 * mu + s)
    } else {
        -0.5 * mu + s
    }
}

fn comparison_mu_at(n: usize, kappa: f64, r: f64) -> f64 {
    let m = (n - 1) as f64;
    if kappa == 0.0 {
        m / r
    } else {
        let sk = kappa.sqrt();
        m * sk / (sk * r).tanh()
    }
}

/// Uniform rate `alpha_{r0,lambda,kappa}`: the decay rate at the Bishop bound
/// `(n-1) sqrt(kappa) coth(sqrt(kappa) r0)`, or `(n-1)/r0` when `kappa = 0`.
pub fn alpha_uniform(r0: f64, lambda: f64, kappa: f64, n: usize) -> f64 {
    decay_rate(comparison_mu_at(n, kappa, r0), lambda)
}

/// `lim_{r0 -> inf} alpha_uniform = -(n-1)sqrt(kappa)/2 + sqrt((n-1)^2 kappa/4 + lambda)`.
pub fn alpha_infinity(lambda: f64, kappa: f64, n: usize) -> f64 {
    decay_rate((n - 1) as f64 * kappa.sqrt(), lambda)
}

/// Known bottom of the spectrum used as the default `E` for presets.
pub fn default_spectral_bottom(model: &ModelManifold) -> f64 {
    match model.preset_tag() {
        PresetTag::Euclidean | PresetTag::CustomTable => 0.0,
        PresetTag::ConstantCurvature | PresetTag::DamekRicci => {
            let mu = model.asymptotic_mu();
            0.25 * mu * mu
        }
    }
}

/// Upper bound on the spherical sums of one resolvent kernel.
#[derive(Debug, Clone)]
pub struct DecayBound {
    pub r0: f64,
    pub lambda: f64,
    pub coefficient: f64,
    pub psi_bar_r0: f64,
    pub alpha_uniform: f64,
    /// Radii `>= r0` at which the bound is tabulated (the solver grid).
    pub grid: Vec<f64>,
    /// `ln C - int_{r0}^r rate` on `grid`.
    pub log_envelope: Vec<f64>,
    /// `ln C - alpha_uniform (r - r0)` on `grid`.
    pub log_uniform: Vec<f64>,
    envelope: MuEnvelope,
}

fn rate_integral(env: &MuEnvelope, lambda: f64, a: f64, b: f64) -> Result<f64, BoundsError> {
    if b <= a {
        return Ok(0.0);
    }
    let cfg = QuadConfig {
        abs_tol: 1e-15,
        rel_tol: 1e-12,
        max_subdivisions: 200,
    };
    Ok(integrate(|s| decay_rate(env.eval(s), lambda), a, b, &cfg)?.value)
}

impl DecayBound {
    pub fn rate_integrand(&self, s: f64) -> f64 {
        decay_rate(self.envelope.eval(s), self.lambda)
    }

    /// `ln` of the envelope-form bound at any `r >= r0`.
    pub fn log_eval(&self, r: f64) -> Result<f64, BoundsError> {
        if r < self.r0 {
            return Err(BoundsError::InvalidInput(format!("r = {r} is below r0 = {}", self.r0)));
        }
        let i = self.grid.partition_point(|&g| g <= r).saturating_sub(1);
        Ok(self.log_envelope[i] - rate_integral(&self.envelope, self.lambda, self.grid[i], r)?)
    }

    pub fn eval(&self, r: f64) -> Result<f64, BoundsError> {
        Ok(self.log_eval(r)?.exp())
    }

    pub fn log_uniform_eval(&self, r: f64) -> f64 {
        self.coefficient.ln() - self.alpha_uniform * (r - self.r0)
    }

    pub fn envelope(&self) -> &MuEnvelope {
        &self.envelope
    }
}

/// Builds the bound from a solved kernel. `C = psi_bar(r0) + 1/alpha_uniform`.
pub fn main_bound(res: &RadialResolvent, r0: f64) -> Result<DecayBound, BoundsError> {
    let (lo, hi) = (res.r_min(), res.r_max());
    if !(r0 >= lo && r0 < hi) {
        return Err(BoundsError::OutOfGrid { r0, lo, hi });
    }
    let sums = res.spherical_sums();
    let start = sums.index_at_or_after(r0);
    let on_grid = (sums.grid[start] - r0).abs() <= 1e-12 * r0;
    let psi_bar_r0 = if on_grid {
        sums.psi_bar[start]
    } else {
        sums.log_psi_bar_at(r0).exp()
    };
    let mut grid = vec![r0];
    let first = if on_grid { start + 1 } else { start };
    grid.extend_from_slice(&sums.grid[first..]);

    let model = &res.model;
    let lambda = res.lambda;
    let alpha = alpha_uniform(r0, lambda, model.kappa(), model.n());
    let coefficient = psi_bar_r0 + 1.0 / alpha;
    let envelope = model.mu_envelope(r0, hi);
    let log_c = coefficient.ln();

    let mut log_envelope = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    log_envelope.push(log_c);
    for w in grid.windows(2) {
        acc += rate_integral(&envelope, lambda, w[0], w[1])?;
        log_envelope.push(log_c - acc);
    }
    let log_uniform = grid.iter().map(|r| log_c - alpha * (r - r0)).collect();
    Ok(DecayBound {
        r0,
        lambda,
        coefficient,
        psi_bar_r0,
        alpha_uniform: alpha,
        grid,
        log_envelope,
        log_uniform,
        envelope,
    })
}

/// Volume of the radius-`b` ball in the comparison space of curvature `-kappa`.
pub fn comparison_volume(n: usize, kappa: f64, b: f64) -> Result<f64, BoundsError> {
    let c = unit_sphere_area(n);
    if kappa == 0.0 {
        return Ok(c * b.powi(n as i32) / n as f64);
    }
    let v = integrate(
        |s| log_comparison_warp_power(n, kappa, s).exp(),
        0.0,
        b,
        &QuadConfig::rel(1e-13),
    )?;
    Ok(c * v.value)
}

/// Both forms of the coefficient bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientBound {
    /// Full display.
    pub full: f64,
    /// `C_cor e^{-sqrt(lambda + 3E) r0 / 6} / lambda`.
    pub corollary: f64,
    /// `C_cor`, the supremum over the sampled `(lambda, E)` range.
    pub corollary_constant: f64,
    pub prefactor: f64,
    /// Bessel-type term carrying the certified constant.
    pub term_bessel: f64,
    pub term_tail: f64,
    pub wp_gamma: f64,
    /// Whether `((lambda+3E) b^2, r0^2 / (108 b^2))` lies in the certification box.
    pub certified_params: bool,
}

struct CoeffParts {
    prefactor: f64,
    term_bessel: f64,
    term_tail: f64,
}

#[allow(clippy::too_many_arguments)]
fn coefficient_parts(
    n: usize,
    kappa: f64,
    b: f64,
    vol_ratio: f64,
    e: f64,
    lambda: f64,
    r0: f64,
    wp: f64,
) -> CoeffParts {
    let nf = n as f64;
    let log_pref = nf.ln()
        + nf * 4f64.ln()
        + nf
        + nf * (nf - 1.0) * kappa * b * b
        + vol_ratio.ln()
        + log_comparison_warp_power(n, kappa, r0);
    let root = (lambda + 3.0 * e).sqrt();
    let x = root * r0 / (3.0 * 3f64.sqrt());
    let log_factor = if n == 2 {
        (std::f64::consts::E + 108.0 * b * b / (r0 * r0)).ln()
    } else {
        1.0
    };
    let term_bessel = wp * (6.0 * 3f64.sqrt() / r0).powi(n as i32 - 2) * log_factor
        / (1.0 + x).powf(0.5 * (3.0 - nf))
        * (-x).exp();
    let term_tail = (-lambda * (r0 * r0 / 9.0).min(b * b)).exp()
        / (lambda * (r0 / 3.0).powi(n as i32).min(b.powi(n as i32)));
    CoeffParts {
        prefactor: log_pref.exp(),
        term_bessel,
        term_tail,
    }
}

/// Coefficient bound for a manifold of dimension `n` with `Ric >= -(n-1) kappa`,
/// balls of radius `b` of volume at least `big_b`, and spectral bottom `e`.
pub fn coefficient_upper_bound(
    n: usize,
    kappa: f64,
    b: f64,
    big_b: f64,
    e: f64,
    lambda: f64,
    r0: f64,
) -> Result<CoefficientBound, BoundsError> {
    let ok = |x: f64| x > 0.0 && x.is_finite();
    if n < 2 || !(kappa >= 0.0 && kappa.is_finite()) || !ok(b) || !ok(big_b) || !ok(lambda) || !ok(r0)
        || !(e >= 0.0 && e.is_finite())
    {
        return Err(BoundsError::InvalidInput(format!(
            "need n >= 2, kappa >= 0, E >= 0 and b, B, lambda, r0 > 0 \
             (n = {n}, kappa = {kappa}, b = {b}, B = {big_b}, E = {e}, lambda = {lambda}, r0 = {r0})"
        )));
    }
    let wp = certify_wp_gamma(0.5 * n as f64)?.wp_gamma;
    let vol_ratio = comparison_volume(n, kappa, b)? / big_b;
    let parts = |lam: f64, ee: f64| coefficient_parts(n, kappa, b, vol_ratio, ee, lam, r0, wp);
    let value = |p: &CoeffParts| p.prefactor * (p.term_bessel + p.term_tail);
    let here = parts(lambda, e);
    let full = value(&here);

    // C_cor = sup over lambda and E of full * lambda * e^{sqrt(lambda+3E) r0/6},
    // sampled on a log grid in lambda and a linear grid in E up to the
    // largest value compatible with the curvature bound.
    let scaled = |lam: f64, ee: f64| value(&parts(lam, ee)) * lam * ((lam + 3.0 * ee).sqrt() * r0 / 6.0).exp();
    let e_max = e.max(0.25 * ((n - 1) as f64).powi(2) * kappa);
    let mut sup = scaled(lambda, e);
    for i in 0..=160 {
        let lam = 10f64.powf(-6.0 + 16.0 * i as f64 / 160.0);
        for j in 0..=10 {
            sup = sup.max(scaled(lam, e_max * j as f64 / 10.0));
        }
        sup = sup.max(scaled(lam, e));
    }
    let corollary = sup * (-(lambda + 3.0 * e).sqrt() * r0 / 6.0).exp() / lambda;

    let alpha = (lambda + 3.0 * e) * b * b;
    let beta = r0 * r0 / (108.0 * b * b);
    let inside = |x: f64| {
        let l = x.log10();
        (CERT_LOG10_MIN - 1e-12..=CERT_LOG10_MAX + 1e-12).contains(&l)
    };
    Ok(CoefficientBound {
        full,
        corollary,
        corollary_constant: sup,
        prefactor: here.prefactor,
        term_bessel: here.term_bessel,
        term_tail: here.term_tail,
        wp_gamma: wp,
        certified_params: inside(alpha) && inside(beta),
    })
}
