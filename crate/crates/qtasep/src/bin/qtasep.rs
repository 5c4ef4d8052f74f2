//! Command-line interface: phase classification, limit shapes, simulation,
//! limit-law tables, phase-transition experiments, and saddle diagnostics.
//!
//! Exit codes: 0 success, 2 validation/usage error, 3 numeric-tolerance
//! failure.

// Guards written as `!(x > 0.0)` deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qtasep::error::{Error, Result};
use qtasep::harness::{self, ExperimentConfig, Preset, RunManifest};
use qtasep::hydro::{self, RateProfile, ShapeBranch};
use qtasep::limits::{CdfTable, KernelSpec};
use qtasep::qfun::QParams;
use qtasep::saddle;
use qtasep::simulate::{monte_carlo, MonteCarloConfig};

#[derive(Parser)]
#[command(
    name = "qtasep",
    version,
    about = "q-TASEP with slower particles: simulation, hydrodynamics, and limit-law numerics"
)]
struct Cli {
    /// Master seed for all randomness.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output directory (manifest.json, samples.csv, report.json, tables/).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// JSON experiment config or manifest (compare subcommand).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelArgs {
    /// Repulsion parameter q in (0, 1).
    #[arg(long)]
    q: f64,
    /// Macroscopic position parameter theta > 0.
    #[arg(long)]
    theta: f64,
    /// Rate perturbation "idx:rate[,idx:rate...]" (1-based indices).
    #[arg(long)]
    slow: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the fluctuation phase and print the hydrodynamic constants.
    Phase {
        #[command(flatten)]
        model: ModelArgs,
        /// Tolerance for detecting the critical boundary alpha = q^theta.
        #[arg(long, default_value_t = hydro::DEFAULT_BOUNDARY_TOL)]
        boundary_tol: f64,
    },
    /// Emit the limit-shape curve as CSV (theta, x, y, branch).
    Shape {
        /// Repulsion parameter q in (0, 1).
        #[arg(long)]
        q: f64,
        /// Shorthand: one slow particle at this rate (1 = homogeneous).
        #[arg(long)]
        alpha: Option<f64>,
        /// Rate perturbation "idx:rate[,...]"; overrides --alpha.
        #[arg(long)]
        slow: Option<String>,
        #[arg(long, default_value_t = 0.05)]
        theta_min: f64,
        #[arg(long, default_value_t = 4.0)]
        theta_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Monte-Carlo fluctuation samples (CSV: N,run,seed_index,tau,X_N,xi).
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// Scaling-plan offset c.
        #[arg(long, default_value_t = 0.0)]
        c: f64,
        /// Comma-separated list of system sizes N.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        #[arg(long, default_value_t = 100)]
        runs: u64,
    },
    /// Tabulate a limit CDF (CSV: x,F,err_est); cached under out-dir/tables.
    LimitCdf {
        /// Which law: "gue", "bbp", or "gk".
        #[arg(long)]
        law: String,
        /// BBP shifts b_1,...,b_k (law = bbp).
        #[arg(long, value_delimiter = ',')]
        b: Option<Vec<f64>>,
        /// GUE size k (law = gk).
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = -8.0, allow_hyphen_values = true)]
        x_min: f64,
        #[arg(long, default_value_t = 6.0, allow_hyphen_values = true)]
        x_max: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
    },
    /// Run a phase-transition experiment preset and report KS distances.
    Compare {
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        c: f64,
        /// Comma-separated list of system sizes N.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<u64>>,
        #[arg(long, default_value_t = 2000)]
        runs: u64,
        /// Slow-particle multiplicity (critical / gaussian presets).
        #[arg(long)]
        k: Option<usize>,
        /// Slow rate (gaussian preset).
        #[arg(long)]
        alpha: Option<f64>,
        /// Rate offsets btilde_i (full-bbp preset).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        b_tilde: Option<Vec<f64>>,
    },
    /// Numeric checks of the steepest-descent skeleton.
    SaddleCheck {
        #[command(flatten)]
        model: ModelArgs,
        /// Also check the shock action g0 at this alpha (< q^theta).
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 5.0)]
        s_max: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
}

fn parse_slow(spec: &str) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    for part in spec.split(',') {
        let (idx, rate) = part
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("--slow entry '{part}' is not idx:rate")))?;
        let idx: usize = idx
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad particle index '{idx}'")))?;
        let rate: f64 = rate
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad rate '{rate}'")))?;
        out.push((idx, rate));
    }
    Ok(out)
}

fn profile_from(slow: &Option<String>) -> Result<RateProfile> {
    match slow {
        None => Ok(RateProfile::homogeneous()),
        Some(s) => RateProfile::new(parse_slow(s)?),
    }
}

fn write_or_print(out_dir: &Option<PathBuf>, name: &str, content: &str) -> Result<()> {
    match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(name);
            std::fs::write(&path, content)?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_phase(model: &ModelArgs, boundary_tol: f64) -> Result<()> {
    let q = QParams::new(model.q)?;
    let profile = profile_from(&model.slow)?;
    let phase = hydro::classify_phase(q, model.theta, &profile, boundary_tol)?;
    let alpha = profile.alpha();
    let k = profile.slow_multiplicity();
    let hc = hydro::HydroConstants::new(q, model.theta, alpha)?;
    println!("phase: {phase}, k = {k}, alpha = {alpha}");
    println!("q^theta = {:.12}", q.pow(model.theta));
    println!("kappa   = {:.12}", hc.kappa);
    println!("f       = {:.12}", hc.f);
    println!("chi     = {:.12}", hc.chi);
    match (hc.g, hc.sigma) {
        (Some(g), Some(s)) => {
            println!("g       = {g:.12}");
            println!("sigma   = {s:.12}");
        }
        _ => println!("g, sigma: undefined (no slow particle)"),
    }
    Ok(())
}

fn cmd_shape(
    q: f64,
    alpha: Option<f64>,
    slow: &Option<String>,
    theta_min: f64,
    theta_max: f64,
    points: usize,
    out_dir: &Option<PathBuf>,
) -> Result<()> {
    let q = QParams::new(q)?;
    let profile = if slow.is_some() {
        profile_from(slow)?
    } else {
        match alpha {
            Some(a) if a < 1.0 => RateProfile::new(vec![(1, a)])?,
            _ => RateProfile::homogeneous(),
        }
    };
    if points < 2 || !(theta_max > theta_min) || !(theta_min > 0.0) {
        return Err(Error::Config(
            "need theta_max > theta_min > 0 and points >= 2".into(),
        ));
    }
    let grid: Vec<f64> = (0..points)
        .map(|i| theta_min + (theta_max - theta_min) * i as f64 / (points - 1) as f64)
        .collect();
    let pts = hydro::limit_shape(q, &profile, &grid)?;
    let mut csv = String::from("theta,x,y,branch\n");
    for p in pts {
        let branch = match p.branch {
            ShapeBranch::Curved => "curved",
            ShapeBranch::Straight => "straight",
        };
        csv.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{branch}\n",
            p.theta, p.x, p.y
        ));
    }
    write_or_print(out_dir, "shape.csv", &csv)
}

fn cmd_simulate(
    model: &ModelArgs,
    c: f64,
    n: Vec<u64>,
    runs: u64,
    seed: u64,
    threads: usize,
    out_dir: &Option<PathBuf>,
) -> Result<()> {
    let config = MonteCarloConfig {
        q: QParams::new(model.q)?,
        theta: model.theta,
        c,
        n_list: n,
        runs,
        profile: profile_from(&model.slow)?,
        master_seed: seed,
        threads,
    };
    let table = monte_carlo(&config)?;
    write_or_print(out_dir, "samples.csv", &table.to_csv())
}

fn cmd_limit_cdf(
    law: &str,
    b: Option<Vec<f64>>,
    k: Option<usize>,
    x_min: f64,
    x_max: f64,
    step: f64,
    out_dir: &Option<PathBuf>,
) -> Result<()> {
    let spec = match law {
        "gue" => KernelSpec::airy(),
        "bbp" => KernelSpec::bbp(b.unwrap_or_default())?,
        "gk" => KernelSpec::hermite(k.ok_or_else(|| Error::Config("gk needs --k".into()))?)?,
        other => {
            return Err(Error::Config(format!(
                "unknown law '{other}' (expected gue, bbp, or gk)"
            )))
        }
    };
    let default_grid = x_min == -8.0 && x_max == 6.0 && step == 0.05;
    let table = if default_grid {
        let tables_dir = out_dir.as_deref().map(|d: &Path| d.join("tables"));
        CdfTable::cached(&spec, tables_dir.as_deref())?
    } else {
        CdfTable::build(&spec, x_min, x_max, step)?
    };
    write_or_print(out_dir, &format!("{}.csv", spec.label()), &table.to_csv())
}

#[allow(clippy::too_many_arguments)]
fn cmd_compare(
    cli_config: &Option<PathBuf>,
    preset: Option<Preset>,
    q: Option<f64>,
    theta: Option<f64>,
    c: f64,
    n: Option<Vec<u64>>,
    runs: u64,
    k: Option<usize>,
    alpha: Option<f64>,
    b_tilde: Option<Vec<f64>>,
    seed: u64,
    threads: usize,
    out_dir: &Option<PathBuf>,
) -> Result<()> {
    let config = if let Some(path) = cli_config {
        let text = std::fs::read_to_string(path)?;
        // Accept either a manifest (replay) or a bare config.
        match serde_json::from_str::<RunManifest>(&text) {
            Ok(manifest) => manifest.config,
            Err(_) => serde_json::from_str::<ExperimentConfig>(&text)
                .map_err(|e| Error::Config(format!("cannot parse {}: {e}", path.display())))?,
        }
    } else {
        ExperimentConfig {
            preset: preset
                .ok_or_else(|| Error::Config("compare needs --preset or --config".into()))?,
            q: QParams::new(q.ok_or_else(|| Error::Config("compare needs --q".into()))?)?,
            theta: theta.ok_or_else(|| Error::Config("compare needs --theta".into()))?,
            c,
            n_list: n.unwrap_or_else(|| vec![128, 256, 512, 1024]),
            runs,
            master_seed: seed,
            threads,
            k,
            alpha,
            b_tilde,
        }
    };
    let (manifest, _, report) = harness::run_experiment(&config, out_dir.as_deref())?;
    println!(
        "preset {} | phase {} | law {}",
        report.preset,
        manifest.phase,
        manifest.limit_law.label()
    );
    for row in &report.rows {
        println!(
            "N = {:6}  runs = {:6}  KS = {:.5}  [{}]",
            row.n,
            row.n_runs,
            row.ks,
            if row.pass { "pass" } else { "FAIL" }
        );
    }
    println!(
        "KS trend: {}/{} steps decreasing ({})",
        report.decreasing_steps,
        report.rows.len().saturating_sub(1),
        if report.trend_ok { "ok" } else { "FLAT" }
    );
    if let Some(d) = &report.discrimination {
        println!(
            "discrimination at N = {}: KS(BBP) = {:.5}, KS(GUE) = {:.5}, KS(normal) = {:.5} -> {}",
            d.n,
            d.ks_bbp,
            d.ks_gue,
            d.ks_normal,
            if d.bbp_wins {
                "BBP wins"
            } else {
                "BBP does NOT win"
            }
        );
    }
    Ok(())
}

fn cmd_saddle_check(model: &ModelArgs, alpha: Option<f64>, s_max: f64, step: f64) -> Result<()> {
    let q = QParams::new(model.q)?;
    let theta = model.theta;
    let pi4 = std::f64::consts::FRAC_PI_4;

    let cc = saddle::critical_constants(q, theta)?;
    println!("f0 ladder at theta = {theta}:");
    println!("  f0'(theta)   = {:.3e}   (contract <= 1e-9)", cc.d1);
    println!("  f0''(theta)  = {:.3e}   (contract <= 1e-8)", cc.d2);
    println!(
        "  f0'''(theta) = {:.12}  vs 2 chi = {:.12}  (rel err {:.3e})",
        cc.d3,
        cc.two_chi,
        (cc.d3 - cc.two_chi).abs() / cc.two_chi.abs()
    );

    let contour = saddle::ContourRay::new(theta, pi4)?;
    let scan = saddle::steep_descent_scan(
        saddle::SteepDescentTarget::F0,
        q,
        theta,
        &contour,
        s_max,
        step,
    )?;
    println!(
        "steep descent of -Re[f0] on C_(theta,pi/4): {} points, {} violations",
        scan.points,
        scan.violations.len()
    );
    let per = saddle::vertical_periodicity_check(
        saddle::SteepDescentTarget::F0,
        q,
        theta,
        theta + 0.1,
        200,
    )?;
    println!(
        "vertical periodicity of Re[f0] (period {:.6}): max defect {:.3e}, {} monotonicity violations",
        per.period,
        per.max_period_defect,
        per.decrease_violations.len()
    );

    let mut all_ok = scan.ok() && per.ok();
    if let Some(alpha) = alpha {
        let sc = saddle::shock_constants(q, theta, alpha)?;
        println!(
            "g0 ladder at A = log_q(alpha) = {:.6}:",
            q.log_base_q(alpha)
        );
        println!("  g0'(A)  = {:.3e}   (contract <= 1e-9)", sc.d1);
        println!(
            "  g0''(A) = {:.12}  vs sigma = {:.12}  (rel err {:.3e})",
            sc.d2,
            sc.sigma,
            (sc.d2 - sc.sigma).abs() / sc.sigma.abs().max(1e-300)
        );
        let contour = saddle::ContourRay::new(q.log_base_q(alpha), pi4)?;
        let scan_g = saddle::steep_descent_scan(
            saddle::SteepDescentTarget::G0 { alpha },
            q,
            theta,
            &contour,
            s_max,
            step,
        )?;
        println!(
            "steep descent of -Re[g0] on C_(A,pi/4): {} points, {} violations",
            scan_g.points,
            scan_g.violations.len()
        );
        all_ok &= scan_g.ok();
    }
    if !all_ok {
        return Err(Error::Tolerance("saddle checks reported violations".into()));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Phase {
            model,
            boundary_tol,
        } => cmd_phase(model, *boundary_tol),
        Command::Shape {
            q,
            alpha,
            slow,
            theta_min,
            theta_max,
            points,
        } => cmd_shape(
            *q,
            *alpha,
            slow,
            *theta_min,
            *theta_max,
            *points,
            &cli.out_dir,
        ),
        Command::Simulate { model, c, n, runs } => cmd_simulate(
            model,
            *c,
            n.clone(),
            *runs,
            cli.seed,
            cli.threads,
            &cli.out_dir,
        ),
        Command::LimitCdf {
            law,
            b,
            k,
            x_min,
            x_max,
            step,
        } => cmd_limit_cdf(law, b.clone(), *k, *x_min, *x_max, *step, &cli.out_dir),
        Command::Compare {
            preset,
            q,
            theta,
            c,
            n,
            runs,
            k,
            alpha,
            b_tilde,
        } => cmd_compare(
            &cli.config,
            *preset,
            *q,
            *theta,
            *c,
            n.clone(),
            *runs,
            *k,
            *alpha,
            b_tilde.clone(),
            cli.seed,
            cli.threads,
            &cli.out_dir,
        ),
        Command::SaddleCheck {
            model,
            alpha,
            s_max,
            step,
        } => cmd_saddle_check(model, *alpha, *s_max, *step),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
