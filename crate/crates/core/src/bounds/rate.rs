//! Exponential decay rates from log-linear least squares.

use serde::Serialize;

use super::BoundsError;

const MIN_SAMPLES: usize = 20;
const MIN_WINDOW: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateKind {
    /// Integral over the geodesic sphere.
    SphericalSum,
    /// Average over the geodesic sphere.
    SphericalMean,
    /// The kernel itself at distance `r`.
    Pointwise,
}

impl RateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RateKind::SphericalSum => "spherical_sum",
            RateKind::SphericalMean => "spherical_mean",
            RateKind::Pointwise => "pointwise",
        }
    }
}

/// Asymptotic rate for a model whose mean curvature tends to `mu_bar`.
/// Sums decay at `-mu_bar/2 + sqrt(mu_bar^2/4 + lambda)`; means and, on
/// model manifolds, pointwise values at `mu/2 + sqrt(mu^2/4 + lambda)` with
/// `mu = max(mu_bar, 0)`.
pub fn expected_rate(kind: RateKind, mu_bar: f64, lambda: f64) -> f64 {
    match kind {
        RateKind::SphericalSum => -0.5 * mu_bar + (0.25 * mu_bar * mu_bar + lambda).sqrt(),
        RateKind::SphericalMean | RateKind::Pointwise => {
            let mu = mu_bar.max(0.0);
            0.5 * mu + (0.25 * mu * mu + lambda).sqrt()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub window: [f64; 2],
    /// Minus the fitted slope of `ln f`.
    pub fitted_rate: f64,
    /// RMS residual of the linear fit of `-ln f`.
    pub residual: f64,
    pub expected_rate: Option<f64>,
    pub samples: usize,
}

impl RateFit {
    pub fn with_expected(mut self, expected: f64) -> Self {
        self.expected_rate = Some(expected);
        self
    }

    /// `|fitted - expected| / |expected|`, if an expected rate is set.
    pub fn relative_error(&self) -> Option<f64> {
        self.expected_rate.map(|e| (self.fitted_rate - e).abs() / e.abs())
    }
}

/// Fits `ln f = c - rate r` on the samples with `r` in `window`.
pub fn rate_fit(grid: &[f64], log_values: &[f64], window: [f64; 2]) -> Result<RateFit, BoundsError> {
    if grid.len() != log_values.len() {
        return Err(BoundsError::RateFit("grid and values differ in length".to_string()));
    }
    let [ra, rb] = window;
    if !(rb - ra >= MIN_WINDOW) {
        return Err(BoundsError::RateFit(format!(
            "window [{ra}, {rb}] is shorter than {MIN_WINDOW}"
        )));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = grid
        .iter()
        .zip(log_values)
        .filter(|(r, _)| **r >= ra && **r <= rb)
        .map(|(r, l)| (*r, -*l))
        .unzip();
    if xs.len() < MIN_SAMPLES {
        return Err(BoundsError::RateFit(format!(
            "only {} samples in [{ra}, {rb}], need {MIN_SAMPLES}",
            xs.len()
        )));
    }
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(BoundsError::RateFit("non-finite log sample in window".to_string()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
        .sum();
    Ok(RateFit {
        window,
        fitted_rate: slope,
        residual: (ss / n).sqrt(),
        expected_rate: None,
        samples: xs.len(),
    })
}

/// As [`rate_fit`] for raw values, which must be positive in the window.
pub fn rate_fit_values(grid: &[f64], values: &[f64], window: [f64; 2]) -> Result<RateFit, BoundsError> {
    if let Some((r, v)) = grid
        .iter()
        .zip(values)
        .find(|(r, v)| **r >= window[0] && **r <= window[1] && !(**v > 0.0))
    {
        return Err(BoundsError::RateFit(format!("non-positive sample {v} at r = {r}")));
    }
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    rate_fit(grid, &logs, window)
}
