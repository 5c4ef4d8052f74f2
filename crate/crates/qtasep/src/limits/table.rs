//! Precomputed CDF tables with monotone-cubic interpolation and a JSON
//! disk cache keyed by a fingerprint of the kernel spec and grid.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fredholm_cdf_with_err, KernelSpec};
use crate::error::{Error, Result};
use crate::quad::MonotoneCubic;

/// Default tabulation grid.
pub const TABLE_X_MIN: f64 = -8.0;
pub const TABLE_X_MAX: f64 = 6.0;
pub const TABLE_STEP: f64 = 0.05;

/// A tabulated limit CDF.
#[derive(Debug, Clone)]
pub struct CdfTable {
    pub spec: KernelSpec,
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub err_est: Vec<f64>,
    interp: MonotoneCubic,
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    fingerprint: String,
    spec: KernelSpec,
    xs: Vec<f64>,
    values: Vec<f64>,
    err_est: Vec<f64>,
}

/// FNV-1a over the canonical JSON encoding of the spec and grid.
fn fingerprint(spec: &KernelSpec, xs: &[f64]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let payload = serde_json::to_string(&(spec, xs)).expect("spec serializes");
    for byte in payload.as_bytes() {
        h ^= *byte as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

impl CdfTable {
    /// Build over `[x_min, x_max]` with the given step (parallel over grid
    /// points), then validate range and monotonicity to 1e-9 slack.
    pub fn build(spec: &KernelSpec, x_min: f64, x_max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && x_max > x_min) {
            return Err(Error::domain("invalid table grid"));
        }
        let n = ((x_max - x_min) / step).round() as usize + 1;
        let xs: Vec<f64> = (0..n).map(|i| x_min + i as f64 * step).collect();
        let computed: Result<Vec<(f64, f64)>> = xs
            .par_iter()
            .map(|&x| fredholm_cdf_with_err(spec, x))
            .collect();
        let computed = computed?;
        let values: Vec<f64> = computed.iter().map(|p| p.0).collect();
        let err_est: Vec<f64> = computed.iter().map(|p| p.1).collect();
        Self::assemble(spec.clone(), xs, values, err_est)
    }

    /// Default grid `[-8, 6]`, step 0.05.
    pub fn build_default(spec: &KernelSpec) -> Result<Self> {
        Self::build(spec, TABLE_X_MIN, TABLE_X_MAX, TABLE_STEP)
    }

    fn assemble(
        spec: KernelSpec,
        xs: Vec<f64>,
        values: Vec<f64>,
        err_est: Vec<f64>,
    ) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if !(-1e-9..=1.0 + 1e-9).contains(&v) {
                return Err(Error::Tolerance(format!(
                    "CDF table out of range at x = {}: {v}",
                    xs[i]
                )));
            }
            if i > 0 && v < values[i - 1] - 1e-9 {
                return Err(Error::Tolerance(format!(
                    "CDF table not monotone at x = {}: {} -> {v}",
                    xs[i],
                    values[i - 1]
                )));
            }
        }
        // Clamp the interpolation data into [0,1] and enforce exact
        // monotonicity (the raw values may wiggle below 1e-9).
        let mut clean = values.clone();
        let mut run_max = 0.0f64;
        for v in clean.iter_mut() {
            run_max = run_max.max(v.clamp(0.0, 1.0));
            *v = run_max;
        }
        let interp = MonotoneCubic::new(xs.clone(), clean);
        Ok(CdfTable {
            spec,
            xs,
            values,
            err_est,
            interp,
        })
    }

    /// Interpolated CDF, clamped to 0 / 1 strictly outside the grid.
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.xs[0] {
            0.0
        } else if x > *self.xs.last().unwrap() {
            1.0
        } else {
            self.interp.eval(x)
        }
    }

    /// Mean of the tabulated law by trapezoidal integration of
    /// `x dF` over the grid (tails beyond the grid are negligible for the
    /// laws tabulated here).
    pub fn mean(&self) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.xs.len() {
            let mid = 0.5 * (self.xs[i] + self.xs[i - 1]);
            acc += mid * (self.values[i] - self.values[i - 1]);
        }
        acc
    }

    pub fn fingerprint(&self) -> String {
        fingerprint(&self.spec, &self.xs)
    }

    fn cache_path(dir: &Path, spec: &KernelSpec, xs: &[f64]) -> PathBuf {
        dir.join(format!("{}-{}.json", spec.label(), fingerprint(spec, xs)))
    }

    /// Write the table as JSON under `dir`.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = Self::cache_path(dir, &self.spec, &self.xs);
        let file = TableFile {
            fingerprint: self.fingerprint(),
            spec: self.spec.clone(),
            xs: self.xs.clone(),
            values: self.values.clone(),
            err_est: self.err_est.clone(),
        };
        std::fs::write(&path, serde_json::to_string(&file)?)?;
        Ok(path)
    }

    /// Load a cached table if present and fingerprint-compatible.
    pub fn load(dir: &Path, spec: &KernelSpec, x_min: f64, x_max: f64, step: f64) -> Option<Self> {
        let n = ((x_max - x_min) / step).round() as usize + 1;
        let xs: Vec<f64> = (0..n).map(|i| x_min + i as f64 * step).collect();
        let path = Self::cache_path(dir, spec, &xs);
        let text = std::fs::read_to_string(path).ok()?;
        let file: TableFile = serde_json::from_str(&text).ok()?;
        if file.fingerprint != fingerprint(&file.spec, &file.xs) || file.spec != *spec {
            return None;
        }
        Self::assemble(file.spec, file.xs, file.values, file.err_est).ok()
    }

    /// Load from cache or build and cache.
    pub fn cached(spec: &KernelSpec, dir: Option<&Path>) -> Result<Self> {
        if let Some(dir) = dir {
            if let Some(table) = Self::load(dir, spec, TABLE_X_MIN, TABLE_X_MAX, TABLE_STEP) {
                return Ok(table);
            }
        }
        let table = Self::build_default(spec)?;
        if let Some(dir) = dir {
            table.save(dir)?;
        }
        Ok(table)
    }

    /// CSV `x,F,err_est` with 17-significant-digit doubles.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,F,err_est\n");
        for i in 0..self.xs.len() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e}\n",
                self.xs[i], self.values[i], self.err_est[i]
            ));
        }
        out
    }
}
