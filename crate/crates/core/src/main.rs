//! Command-line entry point.
//!
//! ```text
//! nehari-fs --config <path> [--mode solve|verify|compare-cper|coercive|pv-check]
//!           [--seed N] [--out DIR]
//! ```
//!
//! Flags override the corresponding `run.*` keys of the config file. The
//! worker count for multi-start is capped by `NEHARI_FS_THREADS`. Exit
//! status is 0 iff the requested mode succeeded; failures name the first
//! failed certificate in the summary.

use nehari_fs::config::{parse_config, Mode, RunConfig};
use nehari_fs::io;
use nehari_fs::model::CertStatus;
use nehari_fs::solve::{self, MultiStartReport};
use nehari_fs::verify;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const USAGE: &str = "usage: nehari-fs --config <path> \
[--mode solve|verify|compare-cper|coercive|pv-check] [--seed N] [--out DIR]";

struct CliArgs {
    config_path: PathBuf,
    mode: Option<Mode>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

fn parse_args(mut args: std::env::Args) -> Result<CliArgs, String> {
    let _ = args.next();
    let mut config_path = None;
    let mut mode = None;
    let mut seed = None;
    let mut out = None;
    while let Some(arg) = args.next() {
        match arg.as_str() {
            "--config" => {
                config_path = Some(PathBuf::from(args.next().ok_or("--config needs a path")?))
            }
            "--mode" => {
                let m = args.next().ok_or("--mode needs a value")?;
                mode = Some(Mode::parse(&m).ok_or_else(|| format!("unknown mode '{m}'"))?);
            }
            "--seed" => {
                let s = args.next().ok_or("--seed needs a value")?;
                seed = Some(s.parse::<u64>().map_err(|_| format!("bad seed '{s}'"))?);
            }
            "--out" => out = Some(PathBuf::from(args.next().ok_or("--out needs a path")?)),
            "--help" | "-h" => return Err(USAGE.to_string()),
            other => return Err(format!("unknown argument '{other}'\n{USAGE}")),
        }
    }
    Ok(CliArgs {
        config_path: config_path.ok_or(format!("--config is required\n{USAGE}"))?,
        mode,
        seed,
        out,
    })
}

fn main() -> ExitCode {
    let args = match parse_args(std::env::args()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::FAILURE;
        }
    };
    let text = match std::fs::read_to_string(&args.config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", args.config_path.display());
            return ExitCode::FAILURE;
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", args.config_path.display());
            return ExitCode::FAILURE;
        }
    };
    if let Some(m) = args.mode {
        cfg.mode = m;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
        cfg.solver.seed = s;
    }
    if let Some(o) = args.out {
        cfg.out_dir = o;
    }
    let hash = io::config_hash(&format!(
        "{text}\nseed={}\nmode={}",
        cfg.seed,
        cfg.mode.name()
    ));

    match run(&cfg, hash) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cfg: &RunConfig, hash: u64) -> Result<bool, Box<dyn std::error::Error>> {
    let out = &cfg.out_dir;
    std::fs::create_dir_all(out)?;

    if cfg.mode == Mode::PvCheck {
        // operator-level cross-check; no model required
        let result = verify::check_pv_vs_spectral(&[0.5, 1.0, 1.5], cfg.seed);
        println!("{}", result.line());
        io::save_summary(
            &[
                ("mode".into(), "pv-check".into()),
                ("seed".into(), cfg.seed.to_string()),
                (
                    format!("check.{}", result.name),
                    status_str(&result.status).into(),
                ),
                ("detail".into(), result.detail.clone()),
            ],
            hash,
            &out.join("summary.txt"),
        )?;
        return Ok(result.status != CertStatus::Fail);
    }

    let prob = cfg.build_problem()?;
    let cert = prob.certify();
    let mut summary: Vec<(String, String)> = vec![
        ("mode".into(), cfg.mode.name().into()),
        ("seed".into(), cfg.seed.to_string()),
        ("alpha".into(), cfg.alpha.to_string()),
        ("dim".into(), cfg.dim.to_string()),
        ("side_length".into(), cfg.side_length.to_string()),
        ("points_per_cell".into(), cfg.points_per_cell.to_string()),
        ("q".into(), cfg.q.to_string()),
        ("p".into(), prob.p().to_string()),
    ];
    for item in &cert.items {
        summary.push((
            format!("cert.{}", item.name),
            status_str(&item.status).into(),
        ));
    }
    if !cert.passed() {
        let first = cert
            .items
            .iter()
            .find(|i| i.gating && i.status == CertStatus::Fail)
            .expect("a gating failure exists");
        summary.push(("failed_certificate".into(), first.name.clone()));
        io::save_summary(&summary, hash, &out.join("summary.txt"))?;
        eprintln!(
            "model certification failed: {} ({})",
            first.name, first.detail
        );
        return Ok(false);
    }

    match cfg.mode {
        Mode::Solve => {
            let ms = solve::multi_start(&prob, &cfg.solver);
            let ok = write_solve_artifacts(&ms, &prob, cfg, hash, out, &mut summary)?;
            io::save_summary(&summary, hash, &out.join("summary.txt"))?;
            Ok(ok)
        }
        Mode::Verify => {
            let report = verify::run_all(&prob, cfg.seed);
            let mut lines = Vec::new();
            for r in &report.results {
                println!("{}", r.line());
                lines.push(r.line());
                summary.push((format!("check.{}", r.name), status_str(&r.status).into()));
            }
            std::fs::write(out.join("suite_report.txt"), lines.join("\n") + "\n")?;
            summary.push(("all_ok".into(), report.all_ok().to_string()));
            io::save_summary(&summary, hash, &out.join("summary.txt"))?;
            Ok(report.all_ok())
        }
        Mode::CompareCper => {
            let cmp = solve::compare_c_vs_cper(&prob, &cfg.solver)?;
            summary.push(("c".into(), format!("{:.12e}", cmp.c)));
            summary.push(("c_per".into(), format!("{:.12e}", cmp.c_per)));
            summary.push(("c_lt_cper".into(), (cmp.c < cmp.c_per - 1e-6).to_string()));
            for item in &cmp.certificate.items {
                summary.push((
                    format!("cert.{}", item.name),
                    status_str(&item.status).into(),
                ));
                println!("{}: {}", item.name, item.detail);
            }
            if let Some(g) = cmp.report.ground_state() {
                io::save_field(
                    g.solution.field(),
                    cfg.alpha,
                    hash,
                    &out.join("solution.csv"),
                )?;
            }
            io::save_summary(&summary, hash, &out.join("summary.txt"))?;
            Ok(cmp.certificate.passed())
        }
        Mode::Coercive => {
            let ms = solve::multi_start(&prob, &cfg.solver);
            let mut ok = write_solve_artifacts(&ms, &prob, cfg, hash, out, &mut summary)?;
            if let Some(g) = ms.ground_state() {
                let diag = solve::coercive_diagnostics(g, &prob);
                for item in &diag.items {
                    summary.push((
                        format!("cert.{}", item.name),
                        status_str(&item.status).into(),
                    ));
                    println!("{}: {}", item.name, item.detail);
                }
                if !diag.passed() {
                    let first = diag
                        .items
                        .iter()
                        .find(|i| i.gating && i.status == CertStatus::Fail)
                        .expect("a gating failure exists");
                    summary.push(("failed_certificate".into(), first.name.clone()));
                    ok = false;
                }
            }
            io::save_summary(&summary, hash, &out.join("summary.txt"))?;
            Ok(ok)
        }
        Mode::PvCheck => unreachable!("handled above"),
    }
}

fn write_solve_artifacts(
    ms: &MultiStartReport,
    prob: &nehari_fs::Problem,
    cfg: &RunConfig,
    hash: u64,
    out: &Path,
    summary: &mut Vec<(String, String)>,
) -> Result<bool, Box<dyn std::error::Error>> {
    summary.push(("n_starts".into(), cfg.solver.n_starts.to_string()));
    summary.push(("n_converged".into(), ms.reports.len().to_string()));
    summary.push(("n_failures".into(), ms.failures.len().to_string()));
    summary.push(("n_orbits".into(), ms.distinct_orbits().to_string()));
    for (idx, msg) in &ms.failures {
        summary.push((format!("failure.start_{idx}"), msg.clone()));
    }
    let Some(g) = ms.ground_state() else {
        summary.push(("ground_state".into(), "none".into()));
        return Ok(false);
    };
    summary.push(("J_final".into(), format!("{:.12e}", g.j_final)));
    summary.push(("residual_final".into(), format!("{:.6e}", g.residual_final)));
    summary.push(("iterations".into(), g.iterations.to_string()));
    summary.push(("norm_E".into(), format!("{:.12e}", g.solution.norm_e())));
    let (t_min, t_max) = g
        .t_trace
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| {
            (lo.min(t), hi.max(t))
        });
    summary.push((
        "t_star_final".into(),
        format!("{:.12e}", g.t_trace.last().copied().unwrap_or(f64::NAN)),
    ));
    summary.push(("t_star_min".into(), format!("{:.6e}", t_min)));
    summary.push(("t_star_max".into(), format!("{:.6e}", t_max)));
    summary.push((
        "boundary_smallness".into(),
        format!(
            "{:.6e}",
            solve::boundary_smallness(g.solution.field(), prob)
        ),
    ));
    if let Some(d) = ms.next_orbit_distance {
        summary.push(("next_orbit_distance".into(), format!("{:.6e}", d)));
    }
    if let Some(gap) = ms.next_orbit_energy_gap {
        summary.push(("next_orbit_energy_gap".into(), format!("{:.6e}", gap)));
    }
    for r in &ms.reports {
        summary.push((
            format!("start_{}.J", r.start_index),
            format!("{:.12e}", r.j_final),
        ));
        summary.push((
            format!("start_{}.distinct", r.start_index),
            r.distinct.to_string(),
        ));
    }

    io::save_field(
        g.solution.field(),
        cfg.alpha,
        hash,
        &out.join("solution.csv"),
    )?;
    io::save_field(
        &g.orbit_representative,
        cfg.alpha,
        hash,
        &out.join("solution_orbit_representative.csv"),
    )?;
    io::save_trace(g, hash, &out.join("trace.csv"))?;
    io::save_profile(
        g.solution.field(),
        prob,
        hash,
        &out.join("plot_profile.csv"),
    )?;
    io::save_spectrum(g.solution.field(), hash, &out.join("plot_spectrum.csv"))?;

    println!(
        "mode={} J_final={:.8} residual={:.3e} iterations={} orbits={}",
        cfg.mode.name(),
        g.j_final,
        g.residual_final,
        g.iterations,
        ms.distinct_orbits()
    );
    Ok(!ms.reports.is_empty())
}

fn status_str(s: &CertStatus) -> &'static str {
    match s {
        CertStatus::Pass => "pass",
        CertStatus::Fail => "fail",
        CertStatus::Skip => "skip",
    }
}
