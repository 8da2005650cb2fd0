//! Decay bounds for spherical sums of the resolvent kernel and the
//! comparison machinery behind them.

mod decay;
mod diffineq;
mod lower;
mod rate;
mod riccati;

pub use decay::{
    alpha_infinity, alpha_uniform, coefficient_upper_bound, comparison_volume, decay_rate,
    default_spectral_bottom, main_bound, CoefficientBound, DecayBound,
};
pub use diffineq::{bump, bump_second_derivative, diff_ineq_check, pairing, BumpResult, DiffIneqReport, MIN_BUMPS};
pub use lower::{lower_bound, lower_bound_log, ComparisonKernel, CACHE_ENV};
pub use rate::{expected_rate, rate_fit, rate_fit_values, RateFit, RateKind};
pub use riccati::{riccati_solve, riccati_solve_on, RiccatiSolution, RICCATI_TOL};

use thiserror::Error;

use crate::ode::OdeError;
use crate::quad::QuadError;
use crate::resolvent::ResolventError;
use crate::specfun::SpecFunError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{what} violated at r = {r}: {detail}")]
    InvariantViolation {
        what: &'static str,
        r: f64,
        detail: String,
    },
    #[error("r0 = {r0} is outside the solved range [{lo}, {hi})")]
    OutOfGrid { r0: f64, lo: f64, hi: f64 },
    #[error("rate fit: {0}")]
    RateFit(String),
    #[error(transparent)]
    Resolvent(#[from] ResolventError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("comparison kernel cache: {0}")]
    Cache(String),
}
