//! Dormand–Prince 5(4) with embedded error control, stepping exactly onto
//! a caller-supplied list of output abscissae (in either direction).

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size collapsed to {h:e} at t = {t}")]
    StepSizeCollapse { t: f64, h: f64 },
    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("exceeded {0} steps")]
    MaxSteps(usize),
    #[error("output points must be monotone in the integration direction")]
    BadOutputPoints,
}

#[derive(Debug, Clone, Copy)]
pub struct OdeConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Upper bound on |h|; `f64::INFINITY` disables it.
    pub max_step: f64,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-14,
            max_steps: 2_000_000,
            max_step: f64::INFINITY,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c != 0.0 {
            for i in 0..N {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

/// Integrates `y' = f(t, y)` from `(t0, y0)` and returns the state at each of
/// `outputs`, which must be ordered in the direction of integration and lie
/// on the same side of `t0`. A leading output equal to `t0` returns `y0`.
pub fn integrate_to_points<const N: usize, F>(
    f: F,
    t0: f64,
    y0: [f64; N],
    outputs: &[f64],
    cfg: &OdeConfig,
) -> Result<Vec<[f64; N]>, OdeError>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut result = Vec::with_capacity(outputs.len());
    if outputs.is_empty() {
        return Ok(result);
    }
    let last = outputs[outputs.len() - 1];
    let dir = if last >= t0 { 1.0 } else { -1.0 };
    if outputs.windows(2).any(|w| (w[1] - w[0]) * dir < 0.0) || (outputs[0] - t0) * dir < 0.0 {
        return Err(OdeError::BadOutputPoints);
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let span = (last - t0).abs();
    let mut h = initial_step(&f, t, &y, &k1, dir, cfg).min(span.max(f64::MIN_POSITIVE));
    let mut steps = 0usize;

    for &target in outputs {
        while (target - t) * dir > 0.0 {
            if steps >= cfg.max_steps {
                return Err(OdeError::MaxSteps(cfg.max_steps));
            }
            steps += 1;
            let remaining = (target - t).abs();
            let mut hs = h.min(cfg.max_step);
            let hits_target = hs >= remaining;
            if hits_target {
                hs = remaining;
            }
            let hd = hs * dir;

            let k2 = f(t + C2 * hd, &axpy(&y, hd, &[(A21, &k1)]));
            let k3 = f(t + C3 * hd, &axpy(&y, hd, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + C4 * hd, &axpy(&y, hd, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                t + C5 * hd,
                &axpy(&y, hd, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + hd,
                &axpy(&y, hd, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = axpy(&y, hd, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let t_new = if hits_target { target } else { t + hd };
            let k7 = f(t_new, &y_new);

            let mut err = 0.0;
            for i in 0..N {
                let e = hd
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = cfg.atol + cfg.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / sc) * (e / sc);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                h = hs * 0.25;
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(OdeError::NonFinite { t });
                }
                continue;
            }

            if err <= 1.0 {
                t = t_new;
                y = y_new;
                k1 = k7;
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                // A step shortened to land on the target should not shrink h.
                h = if hits_target { h.max(hs * factor) } else { hs * factor };
            } else {
                h = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(OdeError::StepSizeCollapse { t, h });
                }
            }
        }
        result.push(y);
    }
    Ok(result)
}

fn initial_step<const N: usize, F>(
    f: &F,
    t: f64,
    y: &[f64; N],
    dy: &[f64; N],
    dir: f64,
    cfg: &OdeConfig,
) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    // Hairer–Wanner starting step heuristic.
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = cfg.atol + cfg.rtol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (dy[i] / sc).powi(2);
    }
    let d0 = (d0 / N as f64).sqrt();
    let d1 = (d1 / N as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = axpy(y, h0 * dir, &[(1.0, dy)]);
    let dy1 = f(t + h0 * dir, &y1);
    let mut d2 = 0.0;
    for i in 0..N {
        let sc = cfg.atol + cfg.rtol * y[i].abs();
        d2 += ((dy1[i] - dy[i]) / sc).powi(2);
    }
    let d2 = (d2 / N as f64).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(cfg.max_step)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth_hits_outputs() {
        let outs: Vec<f64> = (1..=10).map(|i| i as f64 * 0.5).collect();
        let ys = integrate_to_points(|_t, y: &[f64; 1]| [y[0]], 0.0, [1.0], &outs, &OdeConfig::default())
            .unwrap();
        for (t, y) in outs.iter().zip(&ys) {
            assert!((y[0] / t.exp() - 1.0).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn backward_harmonic_oscillator() {
        let outs = [3.0, 1.0, -2.0];
        let ys = integrate_to_points(
            |_t, y: &[f64; 2]| [y[1], -y[0]],
            5.0,
            [5f64.cos(), -5f64.sin()],
            &outs,
            &OdeConfig::default(),
        )
        .unwrap();
        for (t, y) in outs.iter().zip(&ys) {
            assert!((y[0] - t.cos()).abs() < 1e-8);
            assert!((y[1] + t.sin()).abs() < 1e-8);
        }
    }

    #[test]
    fn output_at_start_returns_initial_state() {
        let ys = integrate_to_points(|_t, _y: &[f64; 1]| [1.0], 2.0, [7.0], &[2.0, 3.0], &OdeConfig::default())
            .unwrap();
        assert_eq!(ys[0][0], 7.0);
        assert!((ys[1][0] - 8.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_monotone_outputs() {
        let r = integrate_to_points(|_t, _y: &[f64; 1]| [1.0], 0.0, [0.0], &[1.0, 0.5], &OdeConfig::default());
        assert_eq!(r, Err(OdeError::BadOutputPoints));
    }
}
