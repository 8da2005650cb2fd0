//! Rotationally symmetric model manifolds described by their radial mean
//! curvature profile `mu(r) = d/dr ln rho(r)`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interp::MonotoneCubic;
use crate::quad::{integrate, QuadConfig, QuadError};
use crate::specfun::unit_sphere_area;

/// Absolute tolerance on `mu(r) <= (n-1) sqrt(kappa) coth(sqrt(kappa) r)`.
pub const BISHOP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("kappa must be finite and nonnegative, got {0}")]
    NegativeKappa(f64),
    #[error("damek_ricci parameters: {0}")]
    DamekRicciMismatch(String),
    #[error("custom table: {0}")]
    InvalidTable(String),
    #[error("Bishop comparison fails at r = {r}: mu = {mu}, bound = {bound}")]
    BishopViolation { r: f64, mu: f64, bound: f64 },
    #[error("model descriptor: {0}")]
    Descriptor(String),
    #[error("radius must be positive, got {0}")]
    InvalidRadius(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetTag {
    Euclidean,
    ConstantCurvature,
    DamekRicci,
    CustomTable,
}

impl PresetTag {
    pub fn as_str(self) -> &'static str {
        match self {
            PresetTag::Euclidean => "euclidean",
            PresetTag::ConstantCurvature => "constant_curvature",
            PresetTag::DamekRicci => "damek_ricci",
            PresetTag::CustomTable => "custom_table",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Profile {
    Euclidean,
    ConstantCurvature { curvature: f64 },
    DamekRicci { m: u32, k: u32 },
    Custom(CustomProfile),
}

// A tabulated profile stored as its deviation from the comparison profile of
// the declared kappa, so that sampled comparison data reproduces it exactly.
#[derive(Debug, Clone, PartialEq)]
struct CustomProfile {
    table: Vec<(f64, f64)>,
    deviation: MonotoneCubic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelManifold {
    n: usize,
    kappa: f64,
    profile: Profile,
}

/// Outcome of [`ModelManifold::bishop_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BishopReport {
    pub pass: bool,
    /// Largest `mu(r) - bound(r)` seen on the check grid.
    pub max_excess: f64,
    pub first_violation: Option<BishopViolationPoint>,
    pub points_checked: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BishopViolationPoint {
    pub r: f64,
    pub mu: f64,
    pub bound: f64,
}

/// `z coth z - 1`, accurate near zero.
fn z_coth_z_minus_one(z: f64) -> f64 {
    if z < 0.1 {
        let z2 = z * z;
        z2 * (1.0 / 3.0 + z2 * (-1.0 / 45.0 + z2 * (2.0 / 945.0 - z2 / 4725.0)))
    } else {
        z / z.tanh() - 1.0
    }
}

/// `ln(sinh z / z)` for `z >= 0`.
fn ln_sinhc(z: f64) -> f64 {
    if z < 0.1 {
        let z2 = z * z;
        z2 * (1.0 / 6.0 + z2 * (-1.0 / 180.0 + z2 * (1.0 / 2835.0 - z2 / 37800.0)))
    } else if z > 20.0 {
        z - std::f64::consts::LN_2 - z.ln() + (-(-2.0 * z).exp()).ln_1p()
    } else {
        (z.sinh() / z).ln()
    }
}

fn ln_cosh(x: f64) -> f64 {
    let x = x.abs();
    if x < 1.0 {
        x.cosh().ln()
    } else {
        x - std::f64::consts::LN_2 + (-2.0 * x).exp().ln_1p()
    }
}

/// Comparison profile `(n-1) sqrt(kappa) coth(sqrt(kappa) r)`, `(n-1)/r` at kappa = 0.
pub fn comparison_mu(n: usize, kappa: f64, r: f64) -> f64 {
    (n as f64 - 1.0) / r + comparison_excess(n, kappa, r)
}

fn comparison_excess(n: usize, kappa: f64, r: f64) -> f64 {
    if kappa == 0.0 {
        0.0
    } else {
        (n as f64 - 1.0) / r * z_coth_z_minus_one(kappa.sqrt() * r)
    }
}

// int_0^r comparison_excess
fn comparison_excess_integral(n: usize, kappa: f64, r: f64) -> f64 {
    if kappa == 0.0 {
        0.0
    } else {
        (n as f64 - 1.0) * ln_sinhc(kappa.sqrt() * r)
    }
}

/// `(sinh(sqrt(kappa) r) / sqrt(kappa))^{n-1}` as a logarithm.
pub fn log_comparison_warp_power(n: usize, kappa: f64, r: f64) -> f64 {
    (n as f64 - 1.0) * r.ln() + comparison_excess_integral(n, kappa, r)
}

fn validate_dimension(n: usize) -> Result<(), ModelError> {
    if n < 2 {
        return Err(ModelError::InvalidDimension(n));
    }
    Ok(())
}

fn validate_kappa(kappa: f64) -> Result<(), ModelError> {
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(ModelError::NegativeKappa(kappa));
    }
    Ok(())
}

impl ModelManifold {
    /// Flat `R^n`.
    pub fn euclidean(n: usize) -> Result<Self, ModelError> {
        validate_dimension(n)?;
        Ok(Self {
            n,
            kappa: 0.0,
            profile: Profile::Euclidean,
        })
    }

    /// Space form of sectional curvature `-kappa`.
    pub fn constant_curvature(n: usize, kappa: f64) -> Result<Self, ModelError> {
        validate_dimension(n)?;
        validate_kappa(kappa)?;
        Ok(Self {
            n,
            kappa,
            profile: Profile::ConstantCurvature { curvature: kappa },
        })
    }

    /// Damek–Ricci space with `m`-dimensional and `k`-dimensional layers,
    /// `n = m + k + 1`, normalized so that `mu -> m/2 + k`.
    pub fn damek_ricci(m: u32, k: u32) -> Result<Self, ModelError> {
        if m + k == 0 {
            return Err(ModelError::DamekRicciMismatch(
                "m + k must be positive".to_string(),
            ));
        }
        let n = (m + k + 1) as usize;
        // Ric = -(m/4 + k) in this normalization.
        let kappa = (m as f64 / 4.0 + k as f64) / (m + k) as f64;
        Ok(Self {
            n,
            kappa,
            profile: Profile::DamekRicci { m, k },
        })
    }

    /// Generic preset constructor keyed by tag; `params` may hold `kappa`
    /// (constant_curvature) or `m` and `k` (damek_ricci).
    pub fn make_preset(
        kind: PresetTag,
        n: usize,
        params: &BTreeMap<String, f64>,
    ) -> Result<Self, ModelError> {
        match kind {
            PresetTag::Euclidean => Self::euclidean(n),
            PresetTag::ConstantCurvature => {
                let kappa = *params.get("kappa").ok_or_else(|| {
                    ModelError::Descriptor("constant_curvature requires kappa".to_string())
                })?;
                Self::constant_curvature(n, kappa)
            }
            PresetTag::DamekRicci => {
                let get = |name: &str| -> Result<u32, ModelError> {
                    let v = *params.get(name).ok_or_else(|| {
                        ModelError::DamekRicciMismatch(format!("missing parameter {name}"))
                    })?;
                    if v < 0.0 || v.fract() != 0.0 || v > 1e6 {
                        return Err(ModelError::DamekRicciMismatch(format!(
                            "{name} must be a nonnegative integer, got {v}"
                        )));
                    }
                    Ok(v as u32)
                };
                let (m, k) = (get("m")?, get("k")?);
                let model = Self::damek_ricci(m, k)?;
                if model.n != n {
                    return Err(ModelError::DamekRicciMismatch(format!(
                        "dimension {n} differs from m + k + 1 = {}",
                        model.n
                    )));
                }
                Ok(model)
            }
            PresetTag::CustomTable => Err(ModelError::Descriptor(
                "custom_table models are built with make_custom".to_string(),
            )),
        }
    }

    /// Model from a table of `(r, mu)` samples with Ricci parameter `kappa`.
    ///
    /// Between knots the deviation `mu - comparison_mu` is interpolated by a
    /// monotone cubic, so the interpolant never exceeds the largest knot
    /// deviation. Below the first knot the deviation falls linearly to zero,
    /// which makes `mu` agree with `(n-1)/r` at the origin. Past the last knot
    /// the deviation is held at its last value.
    pub fn make_custom(n: usize, kappa: f64, table: &[(f64, f64)]) -> Result<Self, ModelError> {
        validate_dimension(n)?;
        validate_kappa(kappa)?;
        if table.len() < 2 {
            return Err(ModelError::InvalidTable(
                "at least two (r, mu) rows are required".to_string(),
            ));
        }
        for (i, &(r, mu)) in table.iter().enumerate() {
            if !(r > 0.0 && r.is_finite()) || !mu.is_finite() {
                return Err(ModelError::InvalidTable(format!(
                    "row {i}: r must be positive and values finite, got ({r}, {mu})"
                )));
            }
            if i > 0 && r <= table[i - 1].0 {
                return Err(ModelError::InvalidTable(format!(
                    "radii must be strictly increasing (row {i}: {r} after {})",
                    table[i - 1].0
                )));
            }
        }
        let x: Vec<f64> = table.iter().map(|p| p.0).collect();
        let dev: Vec<f64> = table
            .iter()
            .map(|&(r, mu)| mu - comparison_mu(n, kappa, r))
            .collect();
        let model = Self {
            n,
            kappa,
            profile: Profile::Custom(CustomProfile {
                table: table.to_vec(),
                deviation: MonotoneCubic::new(x, dev),
            }),
        };
        let report = model.bishop_check();
        if let Some(v) = report.first_violation {
            return Err(ModelError::BishopViolation {
                r: v.r,
                mu: v.mu,
                bound: v.bound,
            });
        }
        Ok(model)
    }

    /// Replaces the declared Ricci parameter; fails if the profile then
    /// violates the Bishop comparison.
    pub fn with_kappa(mut self, kappa: f64) -> Result<Self, ModelError> {
        validate_kappa(kappa)?;
        match &self.profile {
            Profile::Custom(c) => return Self::make_custom(self.n, kappa, &c.table),
            _ => self.kappa = kappa,
        }
        if let Some(v) = self.bishop_check().first_violation {
            return Err(ModelError::BishopViolation {
                r: v.r,
                mu: v.mu,
                bound: v.bound,
            });
        }
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn preset_tag(&self) -> PresetTag {
        match self.profile {
            Profile::Euclidean => PresetTag::Euclidean,
            Profile::ConstantCurvature { .. } => PresetTag::ConstantCurvature,
            Profile::DamekRicci { .. } => PresetTag::DamekRicci,
            Profile::Custom(_) => PresetTag::CustomTable,
        }
    }

    /// Table rows of a custom model.
    pub fn table(&self) -> Option<&[(f64, f64)]> {
        match &self.profile {
            Profile::Custom(c) => Some(&c.table),
            _ => None,
        }
    }

    /// Largest radius at which the profile carries tabulated information.
    pub fn last_knot(&self) -> Option<f64> {
        self.table().map(|t| t[t.len() - 1].0)
    }

    /// Short human-readable label, e.g. `constant_curvature(n=3, kappa=1)`.
    pub fn label(&self) -> String {
        match &self.profile {
            Profile::Euclidean => format!("euclidean(n={})", self.n),
            Profile::ConstantCurvature { curvature } => {
                format!("constant_curvature(n={}, kappa={})", self.n, curvature)
            }
            Profile::DamekRicci { m, k } => format!("damek_ricci(m={m}, k={k})"),
            Profile::Custom(c) => format!(
                "custom_table(n={}, kappa={}, rows={})",
                self.n,
                self.kappa,
                c.table.len()
            ),
        }
    }

    fn deviation(&self, c: &CustomProfile, r: f64) -> f64 {
        let (r1, d1) = (c.table[0].0, c.deviation.values()[0]);
        if r < r1 {
            d1 * r / r1
        } else {
            c.deviation.eval(r)
        }
    }

    /// `mu(r) - (n-1)/r`, bounded at the origin.
    pub fn excess(&self, r: f64) -> f64 {
        match &self.profile {
            Profile::Euclidean => 0.0,
            Profile::ConstantCurvature { curvature } => comparison_excess(self.n, *curvature, r),
            Profile::DamekRicci { m, k } => {
                let (m, k) = (*m as f64, *k as f64);
                (m + k) / r * z_coth_z_minus_one(0.5 * r) + 0.5 * k * (0.5 * r).tanh()
            }
            Profile::Custom(c) => comparison_excess(self.n, self.kappa, r) + self.deviation(c, r),
        }
    }

    /// Radial mean curvature `mu(r)`.
    pub fn mu(&self, r: f64) -> f64 {
        (self.n as f64 - 1.0) / r + self.excess(r)
    }

    /// `int_0^r (mu(s) - (n-1)/s) ds`.
    pub fn excess_integral(&self, r: f64) -> f64 {
        match &self.profile {
            Profile::Euclidean => 0.0,
            Profile::ConstantCurvature { curvature } => {
                comparison_excess_integral(self.n, *curvature, r)
            }
            Profile::DamekRicci { m, k } => {
                let (m, k) = (*m as f64, *k as f64);
                (m + k) * ln_sinhc(0.5 * r) + k * ln_cosh(0.5 * r)
            }
            Profile::Custom(c) => {
                let (r1, d1) = (c.table[0].0, c.deviation.values()[0]);
                let below = 0.5 * d1 * r.min(r1).powi(2) / r1;
                comparison_excess_integral(self.n, self.kappa, r) + below + c.deviation.integral(r)
            }
        }
    }

    /// `lim_{r -> inf} mu(r)`.
    pub fn asymptotic_mu(&self) -> f64 {
        match &self.profile {
            Profile::Euclidean => 0.0,
            Profile::ConstantCurvature { curvature } => (self.n as f64 - 1.0) * curvature.sqrt(),
            Profile::DamekRicci { m, k } => *m as f64 / 2.0 + *k as f64,
            Profile::Custom(c) => {
                let last = c.deviation.values()[c.table.len() - 1];
                (self.n as f64 - 1.0) * self.kappa.sqrt() + last
            }
        }
    }

    /// `ln rho(r)` with `rho(r) ~ r^{n-1}` at the origin.
    pub fn log_density(&self, r: f64) -> f64 {
        (self.n as f64 - 1.0) * r.ln() + self.excess_integral(r)
    }

    pub fn density(&self, r: f64) -> f64 {
        self.log_density(r).exp()
    }

    /// `ln A(r)` with `A = c_{n-1} rho`.
    pub fn log_area(&self, r: f64) -> f64 {
        unit_sphere_area(self.n).ln() + self.log_density(r)
    }

    /// Area of the geodesic sphere of radius `r`.
    pub fn area(&self, r: f64) -> f64 {
        self.log_area(r).exp()
    }

    /// Volume of the geodesic ball of radius `r`.
    pub fn volume(&self, r: f64) -> Result<f64, ModelError> {
        if !(r > 0.0) {
            return Err(ModelError::InvalidRadius(r));
        }
        Ok(integrate(|s| if s > 0.0 { self.area(s) } else { 0.0 }, 0.0, r, &QuadConfig::rel(1e-12))?.value)
    }

    /// Comparison bound `(n-1) sqrt(kappa) coth(sqrt(kappa) r)` at the declared kappa.
    pub fn bishop_bound(&self, r: f64) -> f64 {
        comparison_mu(self.n, self.kappa, r)
    }

    /// Checks `mu <= bishop_bound + BISHOP_TOL` on a logarithmic grid over
    /// `[1e-3, max(100, last knot)]`, plus every table knot.
    pub fn bishop_check(&self) -> BishopReport {
        let upper = self.last_knot().map_or(100.0, |l| l.max(100.0));
        let mut radii = log_grid(1e-3, upper, 600);
        if let Some(t) = self.table() {
            radii.extend(t.iter().map(|p| p.0));
            radii.sort_by(f64::total_cmp);
        }
        let mut max_excess = f64::NEG_INFINITY;
        let mut first = None;
        for &r in &radii {
            // Compare excesses to avoid cancellation against (n-1)/r.
            let gap = self.excess(r) - comparison_excess(self.n, self.kappa, r);
            max_excess = max_excess.max(gap);
            if gap > BISHOP_TOL && first.is_none() {
                first = Some(BishopViolationPoint {
                    r,
                    mu: self.mu(r),
                    bound: self.bishop_bound(r),
                });
            }
        }
        BishopReport {
            pass: first.is_none(),
            max_excess,
            first_violation: first,
            points_checked: radii.len(),
        }
    }

    /// Non-increasing envelope `sup_{t >= r} mu(t)` sampled on `[r0, r_max]`.
    pub fn mu_envelope(&self, r0: f64, r_max: f64) -> MuEnvelope {
        MuEnvelope::new(self.clone(), r0, r_max)
    }

    /// Writes the descriptor form of this model.
    pub fn to_descriptor(&self) -> ModelDescriptor {
        let mut params = BTreeMap::new();
        let mut table = None;
        match &self.profile {
            Profile::ConstantCurvature { curvature } => {
                params.insert("kappa".to_string(), *curvature);
            }
            Profile::DamekRicci { m, k } => {
                params.insert("m".to_string(), *m as f64);
                params.insert("k".to_string(), *k as f64);
            }
            Profile::Custom(c) => table = Some(c.table.iter().map(|&(r, m)| [r, m]).collect()),
            Profile::Euclidean => {}
        }
        ModelDescriptor {
            kind: self.preset_tag(),
            dimension: self.n,
            kappa: Some(self.kappa),
            params: if params.is_empty() { None } else { Some(params) },
            table,
        }
    }
}

/// Logarithmically spaced points from `a` to `b` inclusive.
pub fn log_grid(a: f64, b: f64, points: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..points)
        .map(|i| {
            if i + 1 == points {
                b
            } else {
                (la + (lb - la) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

/// Upper envelope of `mu` over tails, `mu_env(r) = sup_{t >= r} mu(t)`.
///
/// Beyond `max(r_max, last knot)` every profile is non-increasing, so the
/// supremum is taken over a dense grid up to that radius and `mu` itself is
/// used past it.
#[derive(Debug, Clone)]
pub struct MuEnvelope {
    model: ModelManifold,
    nodes: Vec<f64>,
    runmax: Vec<f64>,
}

pub const ENVELOPE_STEP: f64 = 2e-3;

impl MuEnvelope {
    fn new(model: ModelManifold, r0: f64, r_max: f64) -> Self {
        let end = model.last_knot().map_or(r_max, |l| l.max(r_max)).max(r0 * (1.0 + 1e-12));
        let cells = ((end - r0) / ENVELOPE_STEP).ceil().max(1.0) as usize;
        let nodes: Vec<f64> = (0..=cells)
            .map(|i| r0 + (end - r0) * i as f64 / cells as f64)
            .collect();
        let mut runmax = vec![0.0; nodes.len()];
        let mut acc = f64::NEG_INFINITY;
        for i in (0..nodes.len()).rev() {
            acc = acc.max(model.mu(nodes[i]));
            runmax[i] = acc;
        }
        Self { model, nodes, runmax }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let last = self.nodes.len() - 1;
        let mu = self.model.mu(r);
        if r >= self.nodes[last] {
            return mu;
        }
        let idx = self.nodes.partition_point(|&x| x <= r).min(last);
        mu.max(self.runmax[idx])
    }

    /// `lim_{r -> inf} mu_env(r)`.
    pub fn asymptotic(&self) -> f64 {
        self.model.asymptotic_mu()
    }

    pub fn model(&self) -> &ModelManifold {
        &self.model
    }
}

/// JSON model descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDescriptor {
    #[serde(rename = "type")]
    pub kind: PresetTag,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<[f64; 2]>>,
}

impl ModelDescriptor {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Descriptor(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ModelError::Descriptor(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Builds the model. For presets a top-level `kappa` is the declared Ricci
    /// parameter (for constant_curvature it is also the curvature when
    /// `params.kappa` is absent).
    pub fn build(&self) -> Result<ModelManifold, ModelError> {
        let mut params = self.params.clone().unwrap_or_default();
        if self.kind != PresetTag::CustomTable && self.table.is_some() {
            return Err(ModelError::Descriptor(
                "table is only allowed for custom_table".to_string(),
            ));
        }
        match self.kind {
            PresetTag::CustomTable => {
                let table = self.table.as_ref().ok_or_else(|| {
                    ModelError::Descriptor("custom_table requires table".to_string())
                })?;
                let kappa = self.kappa.ok_or_else(|| {
                    ModelError::Descriptor("custom_table requires kappa".to_string())
                })?;
                let rows: Vec<(f64, f64)> = table.iter().map(|p| (p[0], p[1])).collect();
                ModelManifold::make_custom(self.dimension, kappa, &rows)
            }
            PresetTag::ConstantCurvature => {
                if let Some(k) = self.kappa {
                    params.entry("kappa".to_string()).or_insert(k);
                }
                let model = ModelManifold::make_preset(self.kind, self.dimension, &params)?;
                match self.kappa {
                    Some(k) if k != model.kappa => model.with_kappa(k),
                    _ => Ok(model),
                }
            }
            _ => {
                let model = ModelManifold::make_preset(self.kind, self.dimension, &params)?;
                match self.kappa {
                    Some(k) if k != model.kappa => model.with_kappa(k),
                    _ => Ok(model),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn coth(x: f64) -> f64 {
        1.0 / x.tanh()
    }

    #[test]
    fn preset_profiles() {
        assert_eq!(ModelManifold::euclidean(3).unwrap().mu(1.0), 2.0);
        let h3 = ModelManifold::constant_curvature(3, 1.0).unwrap();
        assert!((h3.mu(40.0) - 2.0).abs() < 1e-12);
        let cc = ModelManifold::constant_curvature(2, 4.0).unwrap();
        assert!((cc.mu(1.0) - 2.0 * coth(2.0)).abs() < 1e-13);
        assert!((cc.mu(1.0) - 2.0746).abs() < 1e-4);
        let dr = ModelManifold::damek_ricci(2, 1).unwrap();
        assert_eq!(dr.n(), 4);
        for &r in &[0.05, 0.7, 3.0, 12.0] {
            let direct = 1.5 * coth(0.5 * r) + 0.5 * (0.5 * r).tanh();
            assert!((dr.mu(r) - direct).abs() < 1e-12 * direct);
        }
    }

    #[test]
    fn excess_series_branch_is_continuous() {
        let z: f64 = 0.1;
        let series = z_coth_z_minus_one(z * (1.0 - 1e-15));
        assert!((series / (z / z.tanh() - 1.0) - 1.0).abs() < 1e-12);
        assert!((ln_sinhc(z * (1.0 - 1e-15)) / (z.sinh() / z).ln() - 1.0).abs() < 1e-12);
        let z: f64 = 20.0;
        assert!((ln_sinhc(z * (1.0 + 1e-15)) - (z.sinh() / z).ln()).abs() < 1e-13);
    }

    #[test]
    fn invalid_presets_are_rejected() {
        assert_eq!(ModelManifold::euclidean(1), Err(ModelError::InvalidDimension(1)));
        assert!(matches!(
            ModelManifold::constant_curvature(3, -1.0),
            Err(ModelError::NegativeKappa(_))
        ));
        let mut p = BTreeMap::new();
        p.insert("m".to_string(), 2.0);
        p.insert("k".to_string(), 1.0);
        assert!(matches!(
            ModelManifold::make_preset(PresetTag::DamekRicci, 5, &p),
            Err(ModelError::DamekRicciMismatch(_))
        ));
        p.insert("k".to_string(), 0.5);
        assert!(ModelManifold::make_preset(PresetTag::DamekRicci, 3, &p).is_err());
    }

    #[test]
    fn areas_and_volumes() {
        let e3 = ModelManifold::euclidean(3).unwrap();
        assert!((e3.area(1.0) - 4.0 * PI).abs() < 1e-13);
        let h3 = ModelManifold::constant_curvature(3, 1.0).unwrap();
        for &r in &[0.01f64, 0.5, 2.0, 9.0] {
            let exact = 4.0 * PI * r.sinh().powi(2);
            assert!((h3.area(r) / exact - 1.0).abs() < 1e-12);
        }
        // Volume of the hyperbolic ball: pi (sinh 2r - 2r).
        let v = h3.volume(1.5).unwrap();
        assert!((v / (PI * (3f64.sinh() - 3.0)) - 1.0).abs() < 1e-10);
        let e4 = ModelManifold::euclidean(4).unwrap();
        let omega4 = unit_sphere_area(4) / 4.0;
        assert!((e4.volume(2.0).unwrap() / (omega4 * 16.0) - 1.0).abs() < 1e-11);
    }

    #[test]
    fn density_is_normalized_at_origin() {
        let r = 1e-4;
        for m in [
            ModelManifold::euclidean(2).unwrap(),
            ModelManifold::constant_curvature(5, 1.0).unwrap(),
            ModelManifold::damek_ricci(2, 1).unwrap(),
            ModelManifold::damek_ricci(0, 3).unwrap(),
        ] {
            let ratio = m.density(r) / r.powi(m.n() as i32 - 1);
            assert!((ratio - 1.0).abs() < 1e-8, "{}", m.label());
        }
    }

    #[test]
    fn damek_ricci_density_closed_form() {
        let dr = ModelManifold::damek_ricci(2, 1).unwrap();
        for &r in &[0.3f64, 4.0, 25.0] {
            let exact = 8.0 * (0.5 * r).sinh().powi(3) * (0.5 * r).cosh();
            assert!((dr.density(r) / exact - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn damek_ricci_with_trivial_m_is_real_hyperbolic() {
        let dr = ModelManifold::damek_ricci(0, 3).unwrap();
        let h4 = ModelManifold::constant_curvature(4, 1.0).unwrap();
        assert!((dr.kappa() - 1.0).abs() < 1e-15);
        for &r in &[0.2, 1.0, 7.0] {
            assert!((dr.mu(r) - h4.mu(r)).abs() < 1e-12);
        }
    }

    #[test]
    fn bishop_checks() {
        assert!(ModelManifold::euclidean(3).unwrap().bishop_check().pass);
        let cc = ModelManifold::constant_curvature(3, 0.7).unwrap().bishop_check();
        assert!(cc.pass && cc.max_excess.abs() < 1e-12);
        assert!(ModelManifold::damek_ricci(2, 1).unwrap().bishop_check().pass);
        // Lowering the declared kappa below the Ricci value must fail.
        assert!(ModelManifold::damek_ricci(2, 1).unwrap().with_kappa(4.0 / 9.0).is_err());
        assert!(ModelManifold::euclidean(3).unwrap().with_kappa(0.3).is_ok());
    }

    #[test]
    fn custom_from_comparison_samples_saturates_bishop() {
        let table: Vec<(f64, f64)> = (1..=300)
            .map(|i| {
                let r = 0.1 * i as f64;
                (r, comparison_mu(3, 1.0, r))
            })
            .collect();
        let m = ModelManifold::make_custom(3, 1.0, &table).unwrap();
        let rep = m.bishop_check();
        assert!(rep.pass);
        assert!(rep.max_excess.abs() < 1e-12);
    }

    #[test]
    fn custom_above_bishop_is_rejected() {
        let table: Vec<(f64, f64)> = (1..=50)
            .map(|i| {
                let r = 0.2 * i as f64;
                (r, comparison_mu(3, 1.0, r) + 1.0)
            })
            .collect();
        match ModelManifold::make_custom(3, 1.0, &table) {
            Err(ModelError::BishopViolation { r, .. }) => assert!(r < 0.2),
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn custom_table_validation() {
        assert!(ModelManifold::make_custom(3, 0.0, &[(1.0, 2.0)]).is_err());
        assert!(ModelManifold::make_custom(3, 0.0, &[(1.0, 2.0), (0.5, 3.0)]).is_err());
        assert!(ModelManifold::make_custom(3, 0.0, &[(0.0, 2.0), (0.5, 3.0)]).is_err());
        assert!(ModelManifold::make_custom(3, 0.0, &[(0.5, f64::NAN), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn custom_round_trip_of_damek_ricci() {
        let dr = ModelManifold::damek_ricci(2, 1).unwrap();
        let table: Vec<(f64, f64)> = (1..=3000).map(|i| 0.01 * i as f64).map(|r| (r, dr.mu(r))).collect();
        let c = ModelManifold::make_custom(4, dr.kappa(), &table).unwrap();
        for &r in &[0.005, 0.1, 1.0, 5.5, 20.0, 40.0] {
            assert!((c.area(r) / dr.area(r) - 1.0).abs() < 1e-8, "r={r}");
        }
        assert!((c.asymptotic_mu() - dr.asymptotic_mu()).abs() < 1e-9);
    }

    #[test]
    fn envelope_properties() {
        let h3 = ModelManifold::constant_curvature(3, 1.0).unwrap();
        let env = h3.mu_envelope(0.5, 30.0);
        for &r in &[0.5, 0.77, 3.0, 29.9, 45.0] {
            assert!((env.eval(r) - h3.mu(r)).abs() < 1e-14);
        }
        let e3 = ModelManifold::euclidean(3).unwrap();
        let env = e3.mu_envelope(1.0, 20.0);
        assert_eq!(env.eval(4.0), 0.5);
    }

    #[test]
    fn envelope_of_bump_is_flat_before_the_bump() {
        let base = |r: f64| comparison_mu(3, 1.0, r) - 0.5;
        let bump = |r: f64| 0.4 * (-(r - 5.0).powi(2) / 0.1).exp();
        let table: Vec<(f64, f64)> = (1..=400)
            .map(|i| 0.05 * i as f64)
            .map(|r| (r, base(r) + bump(r)))
            .collect();
        let m = ModelManifold::make_custom(3, 1.0, &table).unwrap();
        let env = m.mu_envelope(1.0, 20.0);
        // Brute-force running maximum.
        let fine: Vec<f64> = (0..=190_000).map(|i| 1.0 + 1e-4 * i as f64).collect();
        let mut brute = vec![0.0; fine.len()];
        let mut acc = f64::NEG_INFINITY;
        for i in (0..fine.len()).rev() {
            acc = acc.max(m.mu(fine[i]));
            brute[i] = acc;
        }
        let peak = brute[30_000];
        for i in (0..fine.len()).step_by(997) {
            assert!((env.eval(fine[i]) - brute[i]).abs() < 1e-5, "r={}", fine[i]);
        }
        assert!((env.eval(2.0) - peak).abs() < 1e-5 && (env.eval(4.5) - peak).abs() < 1e-5);
        let mut prev = f64::INFINITY;
        for i in 0..2000 {
            let v = env.eval(1.0 + 0.01 * i as f64);
            assert!(v <= prev * (1.0 + 1e-14));
            prev = v;
        }
    }

    #[test]
    fn descriptor_round_trip_and_rejection() {
        let text = r#"{"type": "damek_ricci", "dimension": 4, "params": {"m": 2, "k": 1}}"#;
        let m = ModelDescriptor::from_json(text).unwrap().build().unwrap();
        assert_eq!(m.preset_tag(), PresetTag::DamekRicci);
        let again = m.to_descriptor().build().unwrap();
        assert_eq!(again, m);
        assert!(ModelDescriptor::from_json(r#"{"type": "euclidean", "dimension": 3, "extra": 1}"#).is_err());
        let h = ModelDescriptor::from_json(r#"{"type": "constant_curvature", "dimension": 3, "kappa": 1}"#)
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(h, ModelManifold::constant_curvature(3, 1.0).unwrap());
    }
}
