//! End-to-end CLI checks through the compiled binary.

use std::process::Command;

fn qtasep() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qtasep"))
}

#[test]
fn phase_prints_classification_and_constants() {
    let out = qtasep()
        .args(["phase", "--q", "0.6", "--theta", "1", "--slow", "1:0.4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Gaussian, k = 1"), "{text}");
    for field in ["kappa", "chi", "sigma"] {
        assert!(text.contains(field), "{text}");
    }
}

#[test]
fn unknown_flag_exits_2() {
    let out = qtasep().args(["phase", "--nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.to_lowercase().contains("usage"), "{err}");
}

#[test]
fn invalid_q_exits_2() {
    let out = qtasep()
        .args(["phase", "--q", "1.7", "--theta", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn shape_curved_branches_coincide_where_unperturbed() {
    // alpha = 1 vs alpha = 0.4: the curved parts of the two curves are the
    // same parametric arc; points with theta < log_q(alpha) coincide.
    let run = |alpha: &str| -> Vec<(f64, f64, f64, String)> {
        let out = qtasep()
            .args(["shape", "--q", "0.6", "--alpha", alpha, "--points", "60"])
            .output()
            .unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (
                    f[0].parse().unwrap(),
                    f[1].parse().unwrap(),
                    f[2].parse().unwrap(),
                    f[3].to_string(),
                )
            })
            .collect()
    };
    let solid = run("1");
    let dashed = run("0.4");
    assert!(solid.iter().all(|p| p.3 == "curved"));
    // The shock segment is theta in (0, log_q(alpha)); beyond it the
    // perturbed curve rejoins the homogeneous one.
    let a_theta = 0.4f64.ln() / 0.6f64.ln();
    let mut compared = 0;
    for (s, d) in solid.iter().zip(&dashed) {
        assert_eq!(s.0, d.0);
        if s.0 < a_theta - 0.1 {
            assert_eq!(d.3, "straight");
        } else if s.0 > a_theta + 0.1 {
            assert_eq!(d.3, "curved");
            assert!((s.1 - d.1).abs() < 1e-12 && (s.2 - d.2).abs() < 1e-12);
            compared += 1;
        }
    }
    assert!(compared > 10);
}

#[test]
fn simulate_csv_format_and_seed_determinism() {
    let args = [
        "simulate", "--q", "0.6", "--theta", "1", "--n", "8,16", "--runs", "3", "--seed", "11",
    ];
    let a = qtasep().args(args).output().unwrap();
    assert!(a.status.success());
    let b = qtasep().args(args).output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "N,run,seed_index,tau,X_N,xi");
    assert_eq!(lines.count(), 6);

    // A different seed changes the samples.
    let c = qtasep()
        .args([
            "simulate", "--q", "0.6", "--theta", "1", "--n", "8,16", "--runs", "3", "--seed", "12",
        ])
        .output()
        .unwrap();
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn limit_cdf_gk1_is_normal() {
    let out = qtasep()
        .args([
            "limit-cdf",
            "--law",
            "gk",
            "--k",
            "1",
            "--x-min",
            "-2",
            "--x-max",
            "2",
            "--step",
            "1",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mid: Vec<&str> = text
        .lines()
        .find(|l| l.starts_with("0.0"))
        .unwrap()
        .split(',')
        .collect();
    let f0: f64 = mid[1].parse().unwrap();
    assert!((f0 - 0.5).abs() < 1e-8);

    // Unknown law is a validation error.
    let out = qtasep()
        .args(["limit-cdf", "--law", "weird"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_writes_artifacts_and_replays_identically() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("exp");
    let out = qtasep()
        .args([
            "compare", "--preset", "gue", "--q", "0.6", "--theta", "1", "--n", "12,24", "--runs",
            "16", "--seed", "5",
        ])
        .args(["--out-dir", out_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in ["manifest.json", "samples.csv", "report.json"] {
        assert!(out_dir.join(name).exists(), "missing {name}");
    }
    let samples1 = std::fs::read(out_dir.join("samples.csv")).unwrap();

    // Replay from the manifest with a different thread count.
    let replay_dir = dir.path().join("replay");
    let out = qtasep()
        .args(["compare", "--threads", "1"])
        .args(["--config", out_dir.join("manifest.json").to_str().unwrap()])
        .args(["--out-dir", replay_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let samples2 = std::fs::read(replay_dir.join("samples.csv")).unwrap();
    assert_eq!(samples1, samples2);
}

#[test]
fn saddle_check_passes_on_reference_points() {
    let out = qtasep()
        .args([
            "saddle-check",
            "--q",
            "0.6",
            "--theta",
            "1",
            "--alpha",
            "0.4",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0 violations"), "{text}");
}
