//! Monotone piecewise-cubic Hermite interpolation (Fritsch–Carlson slopes).

use crate::quad::{hermite_cell, hermite_eval, locate, GL5_NODES, GL5_WEIGHTS};

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
    // Exact integral of the interpolant from x[0] to each knot.
    cumulative: Vec<f64>,
}

impl MonotoneCubic {
    /// `x` must be strictly increasing with at least two points.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert!(x.len() >= 2 && x.len() == y.len());
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
            return Self::with_slopes(x, y, d);
        }
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                d[i] = 0.0;
            } else {
                // Weighted harmonic mean for non-uniform spacing.
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        Self::with_slopes(x, y, d)
    }

    fn with_slopes(x: Vec<f64>, y: Vec<f64>, d: Vec<f64>) -> Self {
        let mut cumulative = vec![0.0; x.len()];
        for i in 1..x.len() {
            cumulative[i] = cumulative[i - 1] + hermite_cell(x[i - 1], x[i], y[i - 1], d[i - 1], y[i], d[i]);
        }
        Self { x, y, d, cumulative }
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    /// `int_{x[0]}^t` of [`MonotoneCubic::eval`]; zero for `t <= x[0]`.
    pub fn integral(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return 0.0;
        }
        if t >= self.x[n - 1] {
            return self.cumulative[n - 1] + (t - self.x[n - 1]) * self.y[n - 1];
        }
        let i = locate(&self.x, t);
        let (a, h) = (self.x[i], t - self.x[i]);
        // Five-point Gauss-Legendre is exact on a cubic piece.
        let partial: f64 = GL5_NODES
            .iter()
            .zip(GL5_WEIGHTS.iter())
            .map(|(s, w)| {
                let xs = a + 0.5 * h * (1.0 + s);
                w * hermite_eval(a, self.x[i + 1], self.y[i], self.d[i], self.y[i + 1], self.d[i + 1], xs)
            })
            .sum();
        self.cumulative[i] + 0.5 * h * partial
    }

    /// Evaluates inside the knot range; outside it holds the end values.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = locate(&self.x, t);
        hermite_eval(
            self.x[i],
            self.x[i + 1],
            self.y[i],
            self.d[i],
            self.y[i + 1],
            self.d[i + 1],
            t,
        )
    }
}

// Three-point end formula, limited to preserve shape.
fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d * del0 <= 0.0 {
        0.0
    } else if del0 * del1 <= 0.0 && d.abs() > (3.0 * del0).abs() {
        3.0 * del0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_knots_and_linear_data() {
        let x = vec![0.0, 0.5, 1.5, 2.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let p = MonotoneCubic::new(x.clone(), y.clone());
        for (a, b) in x.iter().zip(&y) {
            assert_eq!(p.eval(*a), *b);
        }
        assert!((p.eval(1.0) - 2.0).abs() < 1e-14);
        assert!((p.eval(3.3) - 8.9).abs() < 1e-13);
    }

    #[test]
    fn holds_end_values_outside() {
        let p = MonotoneCubic::new(vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 7.0]);
        assert_eq!(p.eval(0.0), 4.0);
        assert_eq!(p.eval(10.0), 7.0);
    }

    #[test]
    fn integral_matches_quadrature() {
        let x: Vec<f64> = (0..12).map(|i| 0.3 * i as f64 + 0.05 * (i as f64).sin()).collect();
        let y: Vec<f64> = x.iter().map(|v| v.sqrt() + 0.2 * v).collect();
        let p = MonotoneCubic::new(x, y);
        for &t in &[0.1, 1.234, 3.3, 5.0] {
            let q = crate::quad::integrate(|s| p.eval(s), 0.0, t, &crate::quad::QuadConfig::rel(1e-13))
                .unwrap()
                .value;
            assert!((p.integral(t) - q).abs() < 1e-11, "t={t}");
        }
        assert_eq!(p.integral(-1.0), 0.0);
    }

    proptest! {
        #[test]
        fn monotone_data_gives_monotone_interpolant(
            steps in proptest::collection::vec((0.01f64..2.0, 0.0f64..3.0), 3..20)
        ) {
            let mut x = vec![0.0];
            let mut y = vec![0.0];
            for (dx, dy) in &steps {
                x.push(x.last().unwrap() + dx);
                y.push(y.last().unwrap() + dy);
            }
            let xmax = *x.last().unwrap();
            let p = MonotoneCubic::new(x, y);
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=400 {
                let v = p.eval(xmax * i as f64 / 400.0);
                prop_assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }
}
