//! Lower bound by the constant-curvature comparison kernel `F_{kappa,lambda}`.
//!
//! Kernels are solved once per `(n, kappa, lambda, r_max)` and kept in a
//! process-wide cache. If `RESOLVENT_DECAY_CACHE` names a directory, solved
//! kernels are also stored there as JSON and reused across runs.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use super::BoundsError;
use crate::model::ModelManifold;
use crate::quad::{hermite_eval, locate};
use crate::resolvent::{solve_radial, SolverConfig};

pub const CACHE_ENV: &str = "RESOLVENT_DECAY_CACHE";

/// Sampled `ln F` of the constant-curvature kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonKernel {
    pub n: usize,
    pub kappa: f64,
    pub lambda: f64,
    pub grid: Vec<f64>,
    pub log_u: Vec<f64>,
    pub log_slope: Vec<f64>,
}

impl ComparisonKernel {
    fn solve(n: usize, kappa: f64, lambda: f64, r_max: f64) -> Result<Self, BoundsError> {
        let model = ModelManifold::constant_curvature(n, kappa)
            .map_err(|e| BoundsError::InvalidInput(e.to_string()))?;
        let cfg = SolverConfig {
            r_max: Some(r_max),
            ..SolverConfig::default()
        };
        let res = solve_radial(&model, lambda, &cfg)?;
        Ok(Self {
            n,
            kappa,
            lambda,
            grid: res.grid,
            log_u: res.log_u,
            log_slope: res.log_slope,
        })
    }

    pub fn log_eval(&self, r: f64) -> Result<f64, BoundsError> {
        let (lo, hi) = (self.grid[0], self.grid[self.grid.len() - 1]);
        if !(r >= lo && r <= hi) {
            return Err(BoundsError::InvalidInput(format!(
                "r = {r} outside the comparison kernel range [{lo}, {hi}]"
            )));
        }
        let i = locate(&self.grid, r);
        Ok(hermite_eval(
            self.grid[i],
            self.grid[i + 1],
            self.log_u[i],
            self.log_slope[i],
            self.log_u[i + 1],
            self.log_slope[i + 1],
            r,
        ))
    }
}

type Key = (usize, u64, u64, u64);

fn cache() -> &'static RwLock<HashMap<Key, Arc<ComparisonKernel>>> {
    static CACHE: OnceLock<RwLock<HashMap<Key, Arc<ComparisonKernel>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

// Outer radius used for a query at `r`: 30 unless `r` needs more, then the
// next multiple of ten with a margin of five.
fn r_max_bucket(r: f64) -> f64 {
    if r <= 25.0 {
        30.0
    } else {
        10.0 * ((r + 5.0) / 10.0).ceil()
    }
}

fn disk_path(key: &Key) -> Option<PathBuf> {
    let dir = std::env::var_os(CACHE_ENV)?;
    Some(PathBuf::from(dir).join(format!(
        "cc_n{}_k{:016x}_l{:016x}_r{:016x}.json",
        key.0, key.1, key.2, key.3
    )))
}

fn load_from_disk(key: &Key) -> Option<ComparisonKernel> {
    let text = std::fs::read_to_string(disk_path(key)?).ok()?;
    serde_json::from_str(&text).ok()
}

fn store_on_disk(key: &Key, kernel: &ComparisonKernel) -> Result<(), BoundsError> {
    let Some(path) = disk_path(key) else {
        return Ok(());
    };
    let err = |e: &dyn std::fmt::Display| BoundsError::Cache(format!("{}: {e}", path.display()));
    let dir = path.parent().ok_or_else(|| err(&"no parent directory"))?;
    std::fs::create_dir_all(dir).map_err(|e| err(&e))?;
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| err(&e))?;
    serde_json::to_writer(&tmp, kernel).map_err(|e| err(&e))?;
    tmp.persist(&path).map_err(|e| err(&e))?;
    Ok(())
}

fn comparison_kernel(n: usize, kappa: f64, lambda: f64, r: f64) -> Result<Arc<ComparisonKernel>, BoundsError> {
    let r_max = r_max_bucket(r);
    let key = (n, kappa.to_bits(), lambda.to_bits(), r_max.to_bits());
    if let Some(k) = cache().read().expect("cache lock").get(&key) {
        return Ok(Arc::clone(k));
    }
    let kernel = match load_from_disk(&key) {
        Some(k) if k.n == n && k.kappa == kappa && k.lambda == lambda => k,
        _ => {
            let k = ComparisonKernel::solve(n, kappa, lambda, r_max)?;
            store_on_disk(&key, &k)?;
            k
        }
    };
    let mut guard = cache().write().expect("cache lock");
    Ok(Arc::clone(guard.entry(key).or_insert_with(|| Arc::new(kernel))))
}

/// `ln F_{kappa,lambda}(r)` for the `n`-dimensional space of curvature `-kappa`.
pub fn lower_bound_log(n: usize, kappa: f64, lambda: f64, r: f64) -> Result<f64, BoundsError> {
    if !(lambda > 0.0 && lambda.is_finite()) || !(r > 0.0 && r.is_finite()) {
        return Err(BoundsError::InvalidInput(format!(
            "need lambda > 0 and r > 0 (lambda = {lambda}, r = {r})"
        )));
    }
    comparison_kernel(n, kappa, lambda, r)?.log_eval(r)
}

/// `F_{kappa,lambda}(r)`; any model passing the Bishop check at `kappa` has
/// kernel `u >= F` pointwise.
pub fn lower_bound(n: usize, kappa: f64, lambda: f64, r: f64) -> Result<f64, BoundsError> {
    Ok(lower_bound_log(n, kappa, lambda, r)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resolvent::{log_closed_form_euclidean, log_closed_form_hyperbolic3};

    #[test]
    fn flat_comparison_is_euclidean_kernel() {
        for r in [0.5, 2.0, 9.0, 40.0] {
            let f = lower_bound_log(3, 0.0, 1.0, r).unwrap();
            let g = log_closed_form_euclidean(3, 1.0, r).unwrap();
            assert!((f - g).abs() < 1e-7, "r={r}");
        }
    }

    #[test]
    fn hyperbolic3_comparison() {
        for r in [0.5, 3.0, 14.0] {
            let f = lower_bound_log(3, 1.0, 0.5, r).unwrap();
            assert!((f - log_closed_form_hyperbolic3(0.5, r)).abs() < 1e-7);
        }
    }

    #[test]
    fn damek_ricci_dominates_comparison() {
        let model = ModelManifold::damek_ricci(2, 1).unwrap();
        let kappa = model.kappa();
        assert!(model.bishop_check().pass);
        for lam in [0.5, 2.0] {
            let res = solve_radial(&model, lam, &SolverConfig::default()).unwrap();
            for r in [0.5, 1.0, 3.0, 7.0, 15.0] {
                let u = res.log_u_at(r).unwrap();
                let f = lower_bound_log(model.n(), kappa, lam, r).unwrap();
                assert!(u >= f + (1.0 - 1e-6f64).ln(), "lam={lam} r={r}");
            }
        }
    }

    #[test]
    fn disk_cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let k = ComparisonKernel::solve(3, 1.0, 0.75, 30.0).unwrap();
        let path = dir.path().join("k.json");
        std::fs::write(&path, serde_json::to_string(&k).unwrap()).unwrap();
        let back: ComparisonKernel = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(back, k);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(lower_bound(3, 1.0, 0.0, 1.0).is_err());
        assert!(lower_bound(3, 1.0, 1.0, -1.0).is_err());
    }
}
