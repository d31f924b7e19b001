//! End-to-end runs of the CLI binary: parse, solve, verify, artifacts,
//! exit codes, and byte-level reproducibility.

use std::path::Path;
use std::process::Command;

const SOLITON_CFG: &str = "\
problem.alpha = 2
problem.side_length = 40
problem.points_per_cell = 32
problem.potential = const:1
problem.gamma = zero
problem.nonlinearity = power:p=4
problem.q = 3
solver.n_starts = 2
run.mode = solve
run.seed = 5
";

fn run(dir: &Path, cfg: &str, extra: &[&str]) -> (bool, String) {
    run_env(dir, cfg, extra, &[])
}

fn run_env(dir: &Path, cfg: &str, extra: &[&str], env: &[(&str, &str)]) -> (bool, String) {
    let cfg_path = dir.join("run.cfg");
    std::fs::write(&cfg_path, cfg).unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nehari-fs"));
    cmd.arg("--config").arg(&cfg_path).args(extra).current_dir(dir);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    let text = format!(
        "{}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    (out.status.success(), text)
}

fn tmp_dir(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("nehari_fs_cli_{name}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn solve_mode_writes_artifacts_and_energy() {
    let dir = tmp_dir("solve");
    let (ok, text) = run(&dir, SOLITON_CFG, &["--out", "out"]);
    assert!(ok, "{text}");
    let summary = std::fs::read_to_string(dir.join("out/summary.txt")).unwrap();
    // J_final ≈ 4/3 for the cubic ground state
    let j_line = summary
        .lines()
        .find(|l| l.starts_with("J_final"))
        .expect("summary has J_final");
    let j: f64 = j_line.split('=').nth(1).unwrap().trim().parse().unwrap();
    assert!((j - 4.0 / 3.0).abs() < 1e-3, "{j_line}");
    for artifact in [
        "solution.csv",
        "solution_orbit_representative.csv",
        "trace.csv",
        "plot_profile.csv",
        "plot_spectrum.csv",
    ] {
        assert!(
            dir.join("out").join(artifact).exists(),
            "missing {artifact}"
        );
    }
    // artifacts are self-describing
    let solution = std::fs::read_to_string(dir.join("out/solution.csv")).unwrap();
    assert!(solution.contains("config_hash"));
    assert!(solution.contains("side_length = 40"));
}

#[test]
fn same_config_and_seed_reproduce_bytes() {
    let dir = tmp_dir("deterministic");
    let (ok1, t1) = run(&dir, SOLITON_CFG, &["--out", "a"]);
    let (ok2, t2) = run(&dir, SOLITON_CFG, &["--out", "b"]);
    assert!(ok1 && ok2, "{t1}\n{t2}");
    let a = std::fs::read(dir.join("a/summary.txt")).unwrap();
    let b = std::fs::read(dir.join("b/summary.txt")).unwrap();
    assert_eq!(a, b, "summaries must be byte-identical");
    let sa = std::fs::read(dir.join("a/solution.csv")).unwrap();
    let sb = std::fs::read(dir.join("b/solution.csv")).unwrap();
    assert_eq!(sa, sb);
}

#[test]
fn worker_cap_does_not_change_results() {
    let dir = tmp_dir("threads");
    let (ok1, t1) = run_env(&dir, SOLITON_CFG, &["--out", "par"], &[]);
    let (ok2, t2) = run_env(
        &dir,
        SOLITON_CFG,
        &["--out", "serial"],
        &[("NEHARI_FS_THREADS", "1")],
    );
    assert!(ok1 && ok2, "{t1}\n{t2}");
    let a = std::fs::read(dir.join("par/summary.txt")).unwrap();
    let b = std::fs::read(dir.join("serial/summary.txt")).unwrap();
    assert_eq!(a, b, "worker count must not affect the summary");
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tmp_dir("seed");
    let (ok, text) = run(&dir, SOLITON_CFG, &["--seed", "99", "--out", "out"]);
    assert!(ok, "{text}");
    let summary = std::fs::read_to_string(dir.join("out/summary.txt")).unwrap();
    assert!(summary.contains("seed = 99"), "{summary}");
}

#[test]
fn verify_mode_emits_one_line_per_check() {
    let dir = tmp_dir("verify");
    let cfg = SOLITON_CFG
        .replace("run.mode = solve", "run.mode = verify")
        .replace("problem.side_length = 40", "problem.side_length = 6")
        .replace(
            "problem.points_per_cell = 32",
            "problem.points_per_cell = 16",
        );
    let (ok, text) = run(&dir, &cfg, &["--out", "out"]);
    assert!(ok, "{text}");
    let report = std::fs::read_to_string(dir.join("out/suite_report.txt")).unwrap();
    let lines: Vec<&str> = report.lines().collect();
    assert!(
        lines.len() >= 10,
        "suite should list every check:\n{report}"
    );
    assert!(lines
        .iter()
        .all(|l| l.contains("pass") || l.contains("skip")));
}

#[test]
fn mode_flag_overrides_config() {
    let dir = tmp_dir("override");
    let (ok, text) = run(&dir, SOLITON_CFG, &["--mode", "pv-check", "--out", "out"]);
    assert!(ok, "{text}");
    let summary = std::fs::read_to_string(dir.join("out/summary.txt")).unwrap();
    assert!(summary.contains("mode = pv-check"), "{summary}");
}

#[test]
fn bad_config_is_rejected_with_diagnostic() {
    let dir = tmp_dir("bad");
    let cfg = SOLITON_CFG.replace("problem.q = 3", "problem.q = 5");
    let (ok, text) = run(&dir, &cfg, &[]);
    assert!(!ok);
    assert!(text.contains("requires q < p"), "{text}");

    let cfg2 = SOLITON_CFG.replace("problem.alpha = 2", "problem.alpha = 2.5");
    let (ok2, text2) = run(&dir, &cfg2, &[]);
    assert!(!ok2);
    assert!(text2.contains("alpha must lie in (0,2]"), "{text2}");
}

#[test]
fn failed_certificate_names_itself_and_exits_nonzero() {
    let dir = tmp_dir("cert_fail");
    // positive localized bump violates the energy-comparison dichotomy
    let cfg = SOLITON_CFG.replace(
        "problem.potential = const:1",
        "problem.potential = periodic_plus_localized:base=1,amp=0,loc_amp=0.3,loc_width=1",
    );
    let (ok, text) = run(&dir, &cfg, &["--out", "out"]);
    assert!(!ok);
    assert!(text.contains("localized"), "{text}");
}
