//! Experiment presets, manifests, and Kolmogorov-Smirnov comparison
//! reports: the machinery that reproduces the fluctuation phase transition
//! at desk scale.
//!
//! Presets:
//! - `gue`: homogeneous rates (`alpha = 1`), fluctuations against the GUE
//!   Tracy-Widom law;
//! - `critical`: `k` leading particles at exactly `q^theta`, against the
//!   rank-k BBP law with `b = c (log q)^2 / (2 chi^{2/3})`;
//! - `gaussian`: `k` leading particles at `alpha < q^theta`, against `G_k`
//!   (standard normal for `k = 1`);
//! - `full-bbp`: leading rates `q^{theta + btilde_i N^{-1/3}}`, against the
//!   BBP law with shifts `b + btilde_i`.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hydro::{self, HydroConstants, Phase, RateProfile};
use crate::limits::{CdfTable, KernelSpec};
use crate::qfun::QParams;
use crate::simulate::{monte_carlo_jobs, MonteCarloJob, SampleTable};
use crate::stats::{normal_cdf, EmpiricalDistribution};

/// KS acceptance thresholds at the largest N (calibration targets).
pub const KS_THRESHOLD_GUE: f64 = 0.10;
pub const KS_THRESHOLD_GAUSSIAN: f64 = 0.06;
pub const KS_THRESHOLD_CRITICAL: f64 = 0.10;

/// Experiment presets reproducing the three branches of the transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[clap(rename_all = "kebab-case")]
pub enum Preset {
    Gue,
    Critical,
    Gaussian,
    FullBbp,
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Gue => "gue",
            Preset::Critical => "critical",
            Preset::Gaussian => "gaussian",
            Preset::FullBbp => "full-bbp",
        }
    }

    pub fn ks_threshold(&self) -> f64 {
        match self {
            Preset::Gue | Preset::FullBbp => KS_THRESHOLD_GUE,
            Preset::Critical => KS_THRESHOLD_CRITICAL,
            Preset::Gaussian => KS_THRESHOLD_GAUSSIAN,
        }
    }
}

/// Full experiment configuration; together with nothing else it determines
/// the sample table bit-for-bit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub q: QParams,
    pub theta: f64,
    #[serde(default)]
    pub c: f64,
    pub n_list: Vec<u64>,
    pub runs: u64,
    #[serde(default)]
    pub master_seed: u64,
    /// 0 = rayon default.
    #[serde(default)]
    pub threads: usize,
    /// Slow-particle multiplicity for `critical` / `gaussian` (default 1).
    #[serde(default)]
    pub k: Option<usize>,
    /// Slow rate for the `gaussian` preset (required there).
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Rate offsets for `full-bbp`: rates `q^{theta + btilde_i N^{-1/3}}`.
    #[serde(default)]
    pub b_tilde: Option<Vec<f64>>,
}

/// The limit law a preset is compared against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LimitLaw {
    Gue,
    Bbp { b: Vec<f64> },
    LargestEigGue { k: usize },
}

impl LimitLaw {
    pub fn label(&self) -> String {
        match self {
            LimitLaw::Gue => "F_GUE".into(),
            LimitLaw::Bbp { b } => {
                let parts: Vec<String> = b.iter().map(|x| format!("{x:.4}")).collect();
                format!("F_BBP[{}]", parts.join(","))
            }
            LimitLaw::LargestEigGue { k } => format!("G_{k}"),
        }
    }

    pub fn kernel_spec(&self) -> Result<KernelSpec> {
        Ok(match self {
            LimitLaw::Gue => KernelSpec::airy(),
            LimitLaw::Bbp { b } => KernelSpec::bbp(b.clone())?,
            LimitLaw::LargestEigGue { k } => KernelSpec::hermite(*k)?,
        })
    }
}

/// Reproducibility record written next to every sample table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: ExperimentConfig,
    pub phase: Phase,
    pub constants: HydroConstants,
    pub limit_law: LimitLaw,
    pub wall_clock_secs: f64,
}

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// One `(N, KS)` comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: u64,
    pub ks: f64,
    pub n_runs: u64,
    pub limit_law: String,
    pub pass: bool,
}

/// KS distances of the critical sample against the three candidate laws at
/// the largest N; the transition is resolved when the BBP law wins.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Discrimination {
    pub n: u64,
    pub ks_bbp: f64,
    pub ks_gue: f64,
    pub ks_normal: f64,
    pub bbp_wins: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub preset: String,
    pub rows: Vec<ReportRow>,
    /// Number of consecutive N-pairs with decreasing KS.
    pub decreasing_steps: usize,
    /// At least two thirds of the steps decreasing (finite-N noise allowed).
    pub trend_ok: bool,
    pub discrimination: Option<Discrimination>,
}

/// Derived per-preset data: forced phase, limit law, effective alpha.
struct PresetData {
    limit_law: LimitLaw,
    phase: Phase,
    alpha: f64,
}

fn preset_data(config: &ExperimentConfig) -> Result<PresetData> {
    let q = config.q;
    let theta = config.theta;
    if !(theta > 0.0) {
        return Err(Error::Config(format!("theta must be > 0, got {theta}")));
    }
    let k = config.k.unwrap_or(1);
    match config.preset {
        Preset::Gue => Ok(PresetData {
            limit_law: LimitLaw::Gue,
            phase: Phase::Gue,
            alpha: 1.0,
        }),
        Preset::Critical => {
            let alpha = q.pow(theta);
            if let Some(a) = config.alpha {
                if a != alpha {
                    return Err(Error::Config(format!(
                        "critical preset requires alpha constructed as exactly q^theta = {alpha:?}, got {a:?}"
                    )));
                }
            }
            if k == 0 {
                return Err(Error::Config("critical preset needs k >= 1".into()));
            }
            let b = bbp_shift(q, theta, config.c)?;
            Ok(PresetData {
                limit_law: LimitLaw::Bbp { b: vec![b; k] },
                phase: Phase::Critical,
                alpha,
            })
        }
        Preset::Gaussian => {
            let alpha = config
                .alpha
                .ok_or_else(|| Error::Config("gaussian preset needs --alpha".into()))?;
            if !(alpha > 0.0 && alpha < q.pow(theta)) {
                return Err(Error::Config(format!(
                    "gaussian preset needs 0 < alpha < q^theta = {}, got {alpha}",
                    q.pow(theta)
                )));
            }
            if k == 0 {
                return Err(Error::Config("gaussian preset needs k >= 1".into()));
            }
            Ok(PresetData {
                limit_law: LimitLaw::LargestEigGue { k },
                phase: Phase::Gaussian,
                alpha,
            })
        }
        Preset::FullBbp => {
            let b_tilde = config
                .b_tilde
                .clone()
                .ok_or_else(|| Error::Config("full-bbp preset needs --b-tilde".into()))?;
            if b_tilde.is_empty() {
                return Err(Error::Config("full-bbp needs at least one offset".into()));
            }
            let b = bbp_shift(q, theta, config.c)?;
            Ok(PresetData {
                limit_law: LimitLaw::Bbp {
                    b: b_tilde.iter().map(|bt| b + bt).collect(),
                },
                phase: Phase::Critical,
                alpha: q.pow(theta),
            })
        }
    }
}

/// `b = c (log q)^2 / (2 chi^{2/3})`.
pub fn bbp_shift(q: QParams, theta: f64, c: f64) -> Result<f64> {
    let chi = hydro::chi(q, theta)?;
    Ok(c * q.log_q() * q.log_q() / (2.0 * chi.powf(2.0 / 3.0)))
}

fn profile_for(config: &ExperimentConfig, data: &PresetData, n: u64) -> Result<RateProfile> {
    let k = config.k.unwrap_or(1);
    match config.preset {
        Preset::Gue => Ok(RateProfile::homogeneous()),
        Preset::Critical | Preset::Gaussian => RateProfile::leading_slow(k, data.alpha),
        Preset::FullBbp => {
            let b_tilde = config.b_tilde.as_ref().expect("validated");
            let n13 = (n as f64).powf(-1.0 / 3.0);
            RateProfile::new(
                b_tilde
                    .iter()
                    .enumerate()
                    .map(|(i, bt)| (i + 1, config.q.pow(config.theta + bt * n13)))
                    .collect(),
            )
        }
    }
}

/// Run a preset: simulate, compare against the limit law, and optionally
/// persist `manifest.json`, `samples.csv`, `report.json`, and
/// `tables/*.csv` under `out_dir`.
pub fn run_experiment(
    config: &ExperimentConfig,
    out_dir: Option<&Path>,
) -> Result<(RunManifest, SampleTable, ComparisonReport)> {
    let start = Instant::now();
    if config.n_list.is_empty() {
        return Err(Error::Config("need at least one N".into()));
    }
    let data = preset_data(config)?;

    let mut jobs = Vec::new();
    for &n in &config.n_list {
        let profile = profile_for(config, &data, n)?;
        if profile.max_index() as u64 > n {
            return Err(Error::Config(format!(
                "N = {n} is smaller than the largest perturbed index {}",
                profile.max_index()
            )));
        }
        let plan = hydro::scaling_plan_for_phase(
            config.q,
            config.theta,
            config.c,
            n,
            data.phase,
            data.alpha,
        )?;
        jobs.push(MonteCarloJob { n, profile, plan });
    }

    let samples = monte_carlo_jobs(
        config.q,
        &jobs,
        config.runs,
        config.master_seed,
        config.threads,
    )?;

    let tables_dir = out_dir.map(|d| d.join("tables"));
    let spec = data.limit_law.kernel_spec()?;
    let table = CdfTable::cached(&spec, tables_dir.as_deref())?;

    let threshold = config.preset.ks_threshold();
    let mut rows = Vec::new();
    for &n in &config.n_list {
        let dist = EmpiricalDistribution::new(samples.xi_for(n))?;
        let ks = dist.ks_statistic(|x| table.eval(x));
        rows.push(ReportRow {
            n,
            ks,
            n_runs: dist.len() as u64,
            limit_law: data.limit_law.label(),
            pass: ks <= threshold,
        });
    }
    let decreasing_steps = rows.windows(2).filter(|w| w[1].ks < w[0].ks).count();
    let steps = rows.len().saturating_sub(1);
    let trend_ok = steps == 0 || 3 * decreasing_steps >= 2 * steps;

    // The discriminating check of the critical branch: at the largest N the
    // BBP law must beat both alternatives.
    let discrimination = if config.preset == Preset::Critical {
        let n_max = *config.n_list.iter().max().unwrap();
        let dist = EmpiricalDistribution::new(samples.xi_for(n_max))?;
        let gue_table = CdfTable::cached(&KernelSpec::airy(), tables_dir.as_deref())?;
        let ks_bbp = dist.ks_statistic(|x| table.eval(x));
        let ks_gue = dist.ks_statistic(|x| gue_table.eval(x));
        let ks_normal = dist.ks_statistic(normal_cdf);
        Some(Discrimination {
            n: n_max,
            ks_bbp,
            ks_gue,
            ks_normal,
            bbp_wins: ks_bbp < ks_gue && ks_bbp < ks_normal,
        })
    } else {
        None
    };

    let report = ComparisonReport {
        preset: config.preset.name().into(),
        rows,
        decreasing_steps,
        trend_ok,
        discrimination,
    };

    let constants = HydroConstants::new(config.q, config.theta, data.alpha.min(1.0))?;
    let manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        phase: data.phase,
        constants,
        limit_law: data.limit_law,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    };

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest)?,
        )?;
        std::fs::write(dir.join("samples.csv"), samples.to_csv())?;
        std::fs::write(
            dir.join("report.json"),
            serde_json::to_string_pretty(&report)?,
        )?;
        if let Some(td) = &tables_dir {
            std::fs::create_dir_all(td)?;
            std::fs::write(td.join(format!("{}.csv", spec.label())), table.to_csv())?;
        }
    }

    Ok((manifest, samples, report))
}

/// Re-run the experiment recorded in a manifest; the produced `samples.csv`
/// is byte-identical to the original regardless of thread count.
pub fn replay_manifest(
    manifest: &RunManifest,
    out_dir: Option<&Path>,
) -> Result<(RunManifest, SampleTable, ComparisonReport)> {
    run_experiment(&manifest.config, out_dir)
}
