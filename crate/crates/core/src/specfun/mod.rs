//! Special functions: Gamma, the modified Bessel function of the second kind
//! `K_nu` for real order, and Laplace-type integrals that reduce to it.

mod bessel;
mod laplace;

pub use bessel::{bessel_k, bessel_k_eval, log_bessel_k, log_bessel_k_with, BesselEval, BesselMethod};
pub use laplace::{
    certify_wp_gamma, incomplete_integral, incomplete_integral_bound, incomplete_integral_shape,
    laplace_bessel_integral, log_laplace_bessel_integral, IntegralMode, LaplaceIntegralParams,
    WpCertificate, CERT_LOG10_MAX, CERT_LOG10_MIN, CERT_POINTS_PER_AXIS,
};

use thiserror::Error;

use crate::quad::QuadError;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("value not representable as f64 (ln value = {log_value}); use the log variant")]
    NotRepresentable { log_value: f64 },
    #[error("Bessel quadrature did not converge for nu = {nu}, x = {x}")]
    BesselNonConvergence { nu: f64, x: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("certification of the incomplete-integral constant failed for gamma = {gamma}: ratio {ratio:e} at (alpha, beta) = ({alpha:e}, {beta:e})")]
    CertificationFailed {
        gamma: f64,
        ratio: f64,
        alpha: f64,
        beta: f64,
    },
}

/// Gamma function for `x > 0`.
pub fn gamma_fn(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Area of the unit sphere in `R^n`, `c_{n-1} = 2 pi^{n/2} / Gamma(n/2)`.
pub fn unit_sphere_area(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(h) / gamma_fn(h)
}
