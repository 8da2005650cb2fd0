//! Adaptive Gauss–Kronrod quadrature and a few fixed rules used on sampled grids.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature did not converge on [{a}, {b}]: estimate {estimate:e}, error {error:e} after {subdivisions} subdivisions")]
    NonConvergence {
        a: f64,
        b: f64,
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },
    #[error("integrand returned a non-finite value at t = {t}")]
    NonFinite { t: f64 },
}

/// Tolerances for [`integrate`]. Convergence is declared once the summed
/// error estimate falls below `max(abs_tol, rel_tol * |estimate|)`.
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-300,
            rel_tol: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

impl QuadConfig {
    pub fn rel(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64), QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(QuadError::NonFinite { t: center });
    }
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let (t1, t2) = (center - dx, center + dx);
        let (f1, f2) = (f(t1), f(t2));
        if !f1.is_finite() {
            return Err(QuadError::NonFinite { t: t1 });
        }
        if !f2.is_finite() {
            return Err(QuadError::NonFinite { t: t2 });
        }
        kronrod += w * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Ok((value, error))
}

/// Globally adaptive G7–K15 quadrature of `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult, QuadError> {
    integrate_with_breaks(f, &[a, b], cfg)
}

/// Like [`integrate`] but starts from the partition given by `breaks`
/// (sorted, at least two points). Useful when the integrand has a known peak.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadResult, QuadError> {
    assert!(breaks.len() >= 2, "need at least one interval");
    let mut segments = Vec::with_capacity(breaks.len() + 16);
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (value, error) = gk15(&f, w[0], w[1])?;
            segments.push(Segment {
                a: w[0],
                b: w[1],
                value,
                error,
            });
        }
    }
    let mut evaluations = 15 * segments.len();
    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let err: f64 = segments.iter().map(|s| s.error).sum();
        if err <= cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
            return Ok(QuadResult {
                value: total,
                error: err,
                evaluations,
            });
        }
        if segments.len() >= cfg.max_subdivisions {
            return Err(QuadError::NonConvergence {
                a: breaks[0],
                b: breaks[breaks.len() - 1],
                estimate: total,
                error: err,
                subdivisions: segments.len(),
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Interval exhausted at machine resolution; accept what we have.
            segments.push(Segment { error: 0.0, ..seg });
            continue;
        }
        let (v1, e1) = gk15(&f, seg.a, mid)?;
        let (v2, e2) = gk15(&f, mid, seg.b)?;
        evaluations += 30;
        segments.push(Segment {
            a: seg.a,
            b: mid,
            value: v1,
            error: e1,
        });
        segments.push(Segment {
            a: mid,
            b: seg.b,
            value: v2,
            error: e2,
        });
    }
}

/// Integral over `[a, +inf)` via `t = a + u / (1 - u)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult, QuadError> {
    integrate_to_infinity_scaled(f, a, 1.0, cfg)
}

/// Integral over `[a, +inf)` with the map `t = a + scale * u / (1 - u)`;
/// `scale` should be the width of the bulk of the integrand.
pub fn integrate_to_infinity_scaled<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    scale: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult, QuadError> {
    let g = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let one_minus = 1.0 - u;
        let t = a + scale * u / one_minus;
        let v = f(t);
        if v == 0.0 {
            0.0
        } else {
            v * scale / (one_minus * one_minus)
        }
    };
    integrate(g, 0.0, 1.0, cfg)
}

/// Five-point Gauss–Legendre nodes and weights on `[-1, 1]`.
pub const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
pub const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Integral over one cell `[x0, x1]` of the cubic Hermite interpolant through
/// `(f0, d0)` and `(f1, d1)`: the trapezoid rule with its end correction.
pub fn hermite_cell(x0: f64, x1: f64, f0: f64, d0: f64, f1: f64, d1: f64) -> f64 {
    let h = x1 - x0;
    0.5 * h * (f0 + f1) + h * h / 12.0 * (d0 - d1)
}

/// Value of the cubic Hermite interpolant at `x` inside `[x0, x1]`.
pub fn hermite_eval(x0: f64, x1: f64, f0: f64, d0: f64, f1: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1
}

/// Derivative of the cubic Hermite interpolant at `x`.
pub fn hermite_deriv(x0: f64, x1: f64, f0: f64, d0: f64, f1: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let dh00 = (6.0 * t2 - 6.0 * t) / h;
    let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    let dh01 = (-6.0 * t2 + 6.0 * t) / h;
    let dh11 = 3.0 * t2 - 2.0 * t;
    dh00 * f0 + dh10 * d0 + dh01 * f1 + dh11 * d1
}

/// Index `i` with `grid[i] <= x <= grid[i + 1]`, clamped to the valid cell range.
pub fn locate(grid: &[f64], x: f64) -> usize {
    debug_assert!(grid.len() >= 2);
    let idx = grid.partition_point(|&g| g <= x);
    idx.saturating_sub(1).min(grid.len() - 2)
}
