//! Laplace-type integrals `int e^{-alpha t - beta / t} t^{-gamma} dt` and the
//! certified bound on their truncation to `[0, 1]`.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use serde::Serialize;

use super::{log_bessel_k, SpecFunError};
use crate::quad::{integrate_to_infinity_scaled, QuadConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplaceIntegralParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl LaplaceIntegralParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self, SpecFunError> {
        if !(alpha > 0.0 && alpha.is_finite()) || !(beta > 0.0 && beta.is_finite()) {
            return Err(SpecFunError::InvalidArgument(format!(
                "alpha and beta must be positive, got ({alpha}, {beta})"
            )));
        }
        if !(gamma >= 1.0 && gamma.is_finite()) {
            return Err(SpecFunError::InvalidArgument(format!(
                "gamma must be >= 1, got {gamma}"
            )));
        }
        Ok(Self { alpha, beta, gamma })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegralMode {
    ClosedForm,
    Quadrature,
}

/// `int_0^inf e^{-alpha t - beta/t} t^{-gamma} dt`.
pub fn laplace_bessel_integral(
    p: &LaplaceIntegralParams,
    mode: IntegralMode,
) -> Result<f64, SpecFunError> {
    let l = log_laplace_bessel_integral(p, mode)?;
    let v = l.exp();
    if v == 0.0 || !v.is_finite() {
        return Err(SpecFunError::NotRepresentable { log_value: l });
    }
    Ok(v)
}

/// Logarithm of [`laplace_bessel_integral`].
pub fn log_laplace_bessel_integral(
    p: &LaplaceIntegralParams,
    mode: IntegralMode,
) -> Result<f64, SpecFunError> {
    let LaplaceIntegralParams { alpha, beta, gamma } = *p;
    match mode {
        IntegralMode::ClosedForm => {
            let z = 2.0 * (alpha * beta).sqrt();
            Ok(std::f64::consts::LN_2
                + 0.5 * (gamma - 1.0) * (alpha / beta).ln()
                + log_bessel_k(gamma - 1.0, z)?)
        }
        IntegralMode::Quadrature => {
            // In v = ln t the integrand is exp(-alpha e^v - beta e^{-v} - (gamma - 1) v).
            let phi = |v: f64| -alpha * v.exp() - beta * (-v).exp() - (gamma - 1.0) * v;
            let g1 = gamma - 1.0;
            let t_peak = (-g1 + (g1 * g1 + 4.0 * alpha * beta).sqrt()) / (2.0 * alpha);
            let v_peak = t_peak.ln();
            log_integral_around_peak(phi, v_peak, f64::NEG_INFINITY, alpha * t_peak + beta / t_peak)
        }
    }
}

// ln int_{lower}^{inf} exp(phi(v)) dv, splitting at the peak and factoring out its value.
fn log_integral_around_peak<F: Fn(f64) -> f64>(
    phi: F,
    v_peak: f64,
    lower: f64,
    curvature: f64,
) -> Result<f64, SpecFunError> {
    let cfg = QuadConfig::rel(1e-13);
    let reference = phi(v_peak);
    let width = 1.0 / curvature.max(1e-12).sqrt();
    let right = integrate_to_infinity_scaled(|s| (phi(v_peak + s) - reference).exp(), 0.0, width, &cfg)?;
    let left = if lower == f64::NEG_INFINITY {
        integrate_to_infinity_scaled(|s| (phi(v_peak - s) - reference).exp(), 0.0, width, &cfg)?.value
    } else {
        let span = v_peak - lower;
        if span > 0.0 {
            crate::quad::integrate(|s| (phi(v_peak - s) - reference).exp(), 0.0, span, &cfg)?.value
        } else {
            0.0
        }
    };
    Ok(reference + (left + right.value).ln())
}

/// `int_0^1 e^{-alpha t - beta/t} t^{-gamma} dt` by adaptive quadrature, returned as a log.
pub fn incomplete_integral(p: &LaplaceIntegralParams) -> Result<f64, SpecFunError> {
    let LaplaceIntegralParams { alpha, beta, gamma } = *p;
    // With t = e^{-v}, v in [0, inf): exp(-alpha e^{-v} - beta e^{v} + (gamma - 1) v).
    let phi = |v: f64| -alpha * (-v).exp() - beta * v.exp() + (gamma - 1.0) * v;
    let g1 = gamma - 1.0;
    let t_peak = (-g1 + (g1 * g1 + 4.0 * alpha * beta).sqrt()) / (2.0 * alpha);
    let v_peak = (-t_peak.ln()).max(0.0);
    let t = (-v_peak).exp();
    let curvature = alpha * t + beta / t;
    if v_peak == 0.0 {
        // Integrand decreasing on [0, inf): integrate from the boundary.
        let cfg = QuadConfig::rel(1e-13);
        let reference = phi(0.0);
        let width = 1.0 / curvature.max(1e-12).sqrt();
        let r = integrate_to_infinity_scaled(|s| (phi(s) - reference).exp(), 0.0, width.min(1.0), &cfg)?;
        return Ok(reference + r.value.ln());
    }
    log_integral_around_peak(phi, v_peak, 0.0, curvature)
}

/// The `(alpha, beta)` shape on the right of the incomplete-integral bound,
/// without the constant: `log(e + 1/beta)^{[gamma = 1]} e^{-2 sqrt(alpha beta)} /
/// (beta^{gamma - 1} (1 + 2 sqrt(alpha beta))^{3/2 - gamma})`. Returned as a log.
pub fn incomplete_integral_shape(p: &LaplaceIntegralParams) -> f64 {
    let LaplaceIntegralParams { alpha, beta, gamma } = *p;
    let z = 2.0 * (alpha * beta).sqrt();
    let log_factor = if gamma == 1.0 {
        (std::f64::consts::E + 1.0 / beta).ln().ln()
    } else {
        0.0
    };
    log_factor - (gamma - 1.0) * beta.ln() - (1.5 - gamma) * z.ln_1p() - z
}

/// Result of certifying the constant of the incomplete-integral bound on a
/// logarithmic `(alpha, beta)` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WpCertificate {
    pub gamma: f64,
    /// Certified constant: the maximal ratio on the grid, padded by 1e-7 relative.
    pub wp_gamma: f64,
    pub max_ratio: f64,
    pub argmax_alpha: f64,
    pub argmax_beta: f64,
    pub grid_points: usize,
}

pub const CERT_LOG10_MIN: f64 = -3.0;
pub const CERT_LOG10_MAX: f64 = 3.0;
pub const CERT_POINTS_PER_AXIS: usize = 25;

fn cache() -> &'static RwLock<HashMap<u64, WpCertificate>> {
    static CACHE: OnceLock<RwLock<HashMap<u64, WpCertificate>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Certifies the constant for `gamma` (cached; concurrent callers may
/// recompute, the result is identical).
pub fn certify_wp_gamma(gamma: f64) -> Result<WpCertificate, SpecFunError> {
    if let Some(c) = cache().read().expect("cache poisoned").get(&gamma.to_bits()) {
        return Ok(*c);
    }
    let cert = compute_certificate(gamma)?;
    cache()
        .write()
        .expect("cache poisoned")
        .insert(gamma.to_bits(), cert);
    Ok(cert)
}

fn certification_axis() -> Vec<f64> {
    let n = CERT_POINTS_PER_AXIS;
    (0..n)
        .map(|i| {
            let e = CERT_LOG10_MIN + (CERT_LOG10_MAX - CERT_LOG10_MIN) * i as f64 / (n - 1) as f64;
            10f64.powf(e)
        })
        .collect()
}

fn compute_certificate(gamma: f64) -> Result<WpCertificate, SpecFunError> {
    let axis = certification_axis();
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for &alpha in &axis {
        for &beta in &axis {
            let p = LaplaceIntegralParams::new(alpha, beta, gamma)?;
            let log_ratio = incomplete_integral(&p)? - incomplete_integral_shape(&p);
            if log_ratio > best.0 {
                best = (log_ratio, alpha, beta);
            }
        }
    }
    let max_ratio = best.0.exp();
    if !max_ratio.is_finite() || max_ratio > 1e12 {
        return Err(SpecFunError::CertificationFailed {
            gamma,
            ratio: max_ratio,
            alpha: best.1,
            beta: best.2,
        });
    }
    Ok(WpCertificate {
        gamma,
        wp_gamma: max_ratio * (1.0 + 1e-7),
        max_ratio,
        argmax_alpha: best.1,
        argmax_beta: best.2,
        grid_points: axis.len() * axis.len(),
    })
}

/// Right-hand side of the incomplete-integral bound with the certified
/// constant; returns `(bound_value, wp_gamma)`.
pub fn incomplete_integral_bound(p: &LaplaceIntegralParams) -> Result<(f64, f64), SpecFunError> {
    let cert = certify_wp_gamma(p.gamma)?;
    Ok((cert.wp_gamma * incomplete_integral_shape(p).exp(), cert.wp_gamma))
}
