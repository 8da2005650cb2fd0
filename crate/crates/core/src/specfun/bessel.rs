//! `K_nu(x)` for real `nu >= 0`, `x > 0`.
//!
//! Three routes, all evaluated in log space:
//! - closed form for half-integer orders,
//! - the Hankel large-argument series once `x > 50 max(1, nu^2)`,
//! - otherwise the trapezoid rule on `K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt`.
//!   The integrand is entire and decays double-exponentially, so the
//!   trapezoid rule converges geometrically; the step is halved until two
//!   successive sums agree.

use serde::Serialize;

use super::SpecFunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BesselMethod {
    Quadrature,
    Asymptotic,
    ClosedHalfInteger,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BesselEval {
    pub order: f64,
    pub argument: f64,
    /// `K_nu(x)`; zero or infinite when outside the f64 range.
    pub value: f64,
    pub log_value: f64,
    pub method: BesselMethod,
}

const MAX_NODES: usize = 1 << 14;
const HALF_INTEGER_MAX: f64 = 60.0;

fn validate(nu: f64, x: f64) -> Result<f64, SpecFunError> {
    if !nu.is_finite() {
        return Err(SpecFunError::InvalidArgument(format!("order must be finite, got {nu}")));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecFunError::InvalidArgument(format!(
            "argument must be positive and finite, got {x}"
        )));
    }
    // K_{-nu} = K_nu
    Ok(nu.abs())
}

fn is_half_integer(nu: f64) -> bool {
    let twice = 2.0 * nu;
    nu <= HALF_INTEGER_MAX && twice.fract() == 0.0 && (twice as i64) % 2 == 1
}

fn default_method(nu: f64, x: f64) -> BesselMethod {
    if is_half_integer(nu) {
        BesselMethod::ClosedHalfInteger
    } else if x > 50.0 * nu.powi(2).max(1.0) {
        BesselMethod::Asymptotic
    } else {
        BesselMethod::Quadrature
    }
}

/// Full evaluation record for `K_nu(x)`, choosing the method automatically.
pub fn bessel_k_eval(nu: f64, x: f64) -> Result<BesselEval, SpecFunError> {
    let nu = validate(nu, x)?;
    let method = default_method(nu, x);
    let log_value = log_with(nu, x, method)?;
    Ok(BesselEval {
        order: nu,
        argument: x,
        value: log_value.exp(),
        log_value,
        method,
    })
}

/// `K_nu(x)`. Fails with [`SpecFunError::NotRepresentable`] when the value
/// under- or overflows; [`log_bessel_k`] covers those cases.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64, SpecFunError> {
    let e = bessel_k_eval(nu, x)?;
    if e.value == 0.0 || !e.value.is_finite() || e.log_value < f64::MIN_POSITIVE.ln() {
        return Err(SpecFunError::NotRepresentable {
            log_value: e.log_value,
        });
    }
    Ok(e.value)
}

/// `ln K_nu(x)`.
pub fn log_bessel_k(nu: f64, x: f64) -> Result<f64, SpecFunError> {
    let nu = validate(nu, x)?;
    log_with(nu, x, default_method(nu, x))
}

/// `ln K_nu(x)` by an explicitly chosen route. The closed form requires a
/// half-integer order.
pub fn log_bessel_k_with(nu: f64, x: f64, method: BesselMethod) -> Result<f64, SpecFunError> {
    let nu = validate(nu, x)?;
    if method == BesselMethod::ClosedHalfInteger && !is_half_integer(nu) {
        return Err(SpecFunError::InvalidArgument(format!(
            "closed form needs a half-integer order, got {nu}"
        )));
    }
    log_with(nu, x, method)
}

fn log_with(nu: f64, x: f64, method: BesselMethod) -> Result<f64, SpecFunError> {
    match method {
        BesselMethod::ClosedHalfInteger => Ok(log_half_integer(nu, x)),
        BesselMethod::Asymptotic => Ok(log_asymptotic(nu, x)),
        BesselMethod::Quadrature => log_quadrature(nu, x),
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

// K_{n+1/2}(x) = sqrt(pi/2x) e^{-x} sum_{k=0}^{n} (n+k)! / (k! (n-k)! (2x)^k)
fn log_half_integer(nu: f64, x: f64) -> f64 {
    let n = (nu - 0.5).round() as i64;
    let mut log_terms = Vec::with_capacity(n as usize + 1);
    let mut lc = 0.0;
    log_terms.push(0.0);
    for k in 0..n {
        let num = ((n + k + 1) * (n - k)) as f64;
        lc += (num / ((k + 1) as f64 * 2.0 * x)).ln();
        log_terms.push(lc);
    }
    0.5 * (std::f64::consts::PI / (2.0 * x)).ln() - x + log_sum_exp(&log_terms)
}

fn log_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..80 {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu - odd * odd) / (8.0 * k as f64 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    0.5 * (std::f64::consts::PI / (2.0 * x)).ln() - x + sum.ln()
}

// ln of exp(-x (cosh t - 1)) cosh(nu t)
fn log_integrand(nu: f64, x: f64, t: f64) -> f64 {
    let s = (0.5 * t).sinh();
    let cosh_part = if nu == 0.0 {
        0.0
    } else {
        nu * t + (-2.0 * nu * t).exp().ln_1p() - std::f64::consts::LN_2
    };
    -2.0 * x * s * s + cosh_part
}

fn log_quadrature(nu: f64, x: f64) -> Result<f64, SpecFunError> {
    let peak = if nu > 0.0 { (nu / x).asinh() } else { 0.0 };
    let reference = log_integrand(nu, x, peak);
    // Curvature of the log integrand at the peak sets the initial step.
    let curvature = x * peak.cosh();
    let mut h = (0.5 / curvature.sqrt()).min(0.5);

    // Sum over t = j h for j >= 1 stopping once the terms are negligible and decreasing.
    let tail_sum = |h: f64, start: usize, stride: usize| -> Result<(f64, usize), SpecFunError> {
        let mut acc = 0.0;
        let mut j = start;
        let mut count = 0usize;
        let mut prev = f64::INFINITY;
        loop {
            let t = j as f64 * h;
            let g = log_integrand(nu, x, t) - reference;
            acc += g.exp();
            count += 1;
            if t > peak && g < -60.0 && g < prev {
                break;
            }
            prev = g;
            j += stride;
            if count > MAX_NODES {
                return Err(SpecFunError::BesselNonConvergence { nu, x });
            }
        }
        Ok((acc, count))
    };

    let f0 = (log_integrand(nu, x, 0.0) - reference).exp();
    let (mut inner, mut nodes) = tail_sum(h, 1, 1)?;
    let mut estimate = h * (0.5 * f0 + inner);
    loop {
        // Halve the step: new nodes are the odd multiples of h/2.
        let half = 0.5 * h;
        let (odd, count) = tail_sum(half, 1, 2)?;
        nodes += count;
        inner += odd;
        let refined = half * (0.5 * f0 + inner);
        h = half;
        let converged = (refined - estimate).abs() <= 1e-14 * refined;
        estimate = refined;
        if converged {
            break;
        }
        if nodes > MAX_NODES {
            return Err(SpecFunError::BesselNonConvergence { nu, x });
        }
    }
    Ok(-x + reference + estimate.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{gamma_fn, EULER_GAMMA};
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a / b - 1.0).abs()
    }

    #[test]
    fn half_order_closed_form_at_two() {
        let expected = (PI / 4.0).sqrt() * (-2.0f64).exp();
        let v = bessel_k(0.5, 2.0).unwrap();
        assert!(rel(v, expected) < 1e-14);
        assert!((v - 0.119_938).abs() < 1e-6);
    }

    #[test]
    fn quadrature_matches_half_integer_closed_forms() {
        for &nu in &[0.5, 1.5, 2.5, 4.5, 9.5] {
            for &x in &[1e-3, 0.05, 0.7, 3.0, 17.0, 60.0] {
                let q = log_bessel_k_with(nu, x, BesselMethod::Quadrature).unwrap();
                let c = log_bessel_k_with(nu, x, BesselMethod::ClosedHalfInteger).unwrap();
                assert!((q - c).abs() < 1e-11, "nu={nu} x={x}: {q} vs {c}");
            }
        }
    }

    #[test]
    fn asymptotic_matches_quadrature_at_switchover() {
        for &nu in &[0.0f64, 0.3, 1.0, 2.3] {
            let x = 50.0 * (nu * nu).max(1.0) * 1.01;
            let a = log_bessel_k_with(nu, x, BesselMethod::Asymptotic).unwrap();
            let q = log_bessel_k_with(nu, x, BesselMethod::Quadrature).unwrap();
            assert!((a - q).abs() < 1e-11, "nu={nu}: {a} vs {q}");
        }
    }

    #[test]
    fn known_values() {
        // Reference values (Abramowitz & Stegun tables).
        assert!(rel(bessel_k(0.0, 1.0).unwrap(), 0.421_024_438_240_708_3) < 1e-12);
        assert!(rel(bessel_k(1.0, 1.0).unwrap(), 0.601_907_230_197_234_6) < 1e-12);
        assert!(rel(bessel_k(0.0, 2.0).unwrap(), 0.113_893_872_749_533_4) < 1e-12);
        assert!(rel(bessel_k(1.0, 3.0).unwrap(), 0.040_156_431_128_194_18) < 1e-11);
    }

    #[test]
    fn small_argument_order_zero_tends_to_euler() {
        let x = 1e-8;
        let v = bessel_k(0.0, x).unwrap();
        assert!((v - (2.0 / x).ln() + EULER_GAMMA).abs() < 1e-10);
    }

    #[test]
    fn small_argument_positive_order() {
        let nu: f64 = 1.7;
        let x: f64 = 1e-6;
        let lead = 0.5 * gamma_fn(nu) * (2.0 / x).powf(nu);
        assert!(rel(bessel_k(nu, x).unwrap(), lead) < 1e-6);
    }

    #[test]
    fn large_argument_limit() {
        for &nu in &[0.0, 1.0, 2.3] {
            let x: f64 = 1e4;
            let scaled = bessel_k_eval(nu, x).unwrap().log_value + x + 0.5 * (2.0 * x / PI).ln();
            assert!(scaled.abs() < (4.0 * nu * nu + 1.0) / (8.0 * x) * 1.5);
        }
    }

    #[test]
    fn log_variant_and_underflow() {
        let l = log_bessel_k(0.5, 100.0).unwrap();
        assert!((l - (0.5 * (PI / 200.0).ln() - 100.0)).abs() < 1e-12);
        assert!(((log_bessel_k(1.0, 3.0).unwrap()).exp() / bessel_k(1.0, 3.0).unwrap() - 1.0).abs() < 1e-8);
        match bessel_k(0.0, 1000.0) {
            Err(SpecFunError::NotRepresentable { log_value }) => assert!(log_value < -745.0),
            other => panic!("expected underflow, got {other:?}"),
        }
    }

    #[test]
    fn log_derivative_slope_at_large_x() {
        let x = 200.0;
        let h = 1e-3;
        let slope = (log_bessel_k(0.0, x + h).unwrap() - log_bessel_k(0.0, x - h).unwrap()) / (2.0 * h);
        assert!((slope + 1.0 + 0.5 / x).abs() < 1e-4);
    }

    #[test]
    fn negative_order_and_bad_argument() {
        assert_eq!(bessel_k(-1.3, 2.0).unwrap(), bessel_k(1.3, 2.0).unwrap());
        assert!(bessel_k(1.0, 0.0).is_err());
        assert!(bessel_k(1.0, -1.0).is_err());
        assert!(log_bessel_k_with(1.0, 1.0, BesselMethod::ClosedHalfInteger).is_err());
    }

    #[test]
    fn method_tags() {
        assert_eq!(bessel_k_eval(1.5, 1.0).unwrap().method, BesselMethod::ClosedHalfInteger);
        assert_eq!(bessel_k_eval(1.0, 51.0).unwrap().method, BesselMethod::Asymptotic);
        assert_eq!(bessel_k_eval(1.0, 49.0).unwrap().method, BesselMethod::Quadrature);
    }
}
