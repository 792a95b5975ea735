//! Command-line driver: validate configs, run flows, exercise the comparison
//! principle, study grid refinement, and check the exact radial solution.
//!
//! Exit codes: 0 pass, 1 monitor/estimate failure, 2 admissibility/validation
//! failure, 3 I/O or configuration error. Every exit path ends with a single
//! machine-parsable line `STATUS=<PASS|FAIL|ERROR> REASON=<token>`.

mod config;
mod csvio;

use clap::{Parser, Subcommand};
use config::{parse_config, RunConfig};
use igcf::{
    check_admissible, comparison_check, curvature_consistency, estimate_report,
    random_admissible_pair, run_flow, Baselines, Error as FlowError, FlowMode, ScalarField,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "igcf", version, about = "Inverse Gauss curvature flow simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Suppress everything except the final status line.
    #[arg(long, global = true)]
    quiet: bool,
    /// Override the output directory from the config file.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the initial state of a config for admissibility.
    Validate { config: PathBuf },
    /// Run the flow, emit the monitor series and snapshots, judge estimates.
    Run { config: PathBuf },
    /// Run an ordered pair in lockstep and check the comparison principle.
    Compare {
        config_low: PathBuf,
        config_high: PathBuf,
        /// Draw a seeded random ordered pair instead of the config data.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Repeat the run at doubled resolutions and report convergence.
    Refine {
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: u32,
    },
    /// Constant-data run against the exact radial solution φ(t) = log c − t.
    Exact { config: PathBuf },
}

struct Outcome {
    code: u8,
    reason: String,
}

impl Outcome {
    fn pass() -> Self {
        Self {
            code: 0,
            reason: "ok".into(),
        }
    }

    fn fail(code: u8, reason: impl Into<String>) -> Self {
        Self {
            code,
            reason: reason.into(),
        }
    }
}

fn reason_of(e: &FlowError) -> &'static str {
    match e {
        FlowError::NotSpacelike { .. } => "not_spacelike",
        FlowError::NonConvex { .. } => "non_convex",
        FlowError::Singular { .. } => "singular",
        FlowError::InvalidParameter(_) => "config",
        FlowError::OutOfRange { .. } => "internal",
        FlowError::StepFailed { .. } => "step_failed",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's rendered message doubles as usage text.
            eprint!("{e}");
            println!("STATUS=ERROR REASON=usage");
            return ExitCode::from(3);
        }
    };
    let quiet = cli.quiet;
    let outcome = match &cli.cmd {
        Cmd::Validate { config } => with_config(config, &cli, |cfg| cmd_validate(cfg, quiet)),
        Cmd::Run { config } => with_config(config, &cli, |cfg| cmd_run(cfg, quiet)),
        Cmd::Compare {
            config_low,
            config_high,
            seed,
        } => cmd_compare(config_low, config_high, *seed, &cli),
        Cmd::Refine { config, levels } => {
            let levels = *levels;
            with_config(config, &cli, |cfg| cmd_refine(cfg, levels, quiet))
        }
        Cmd::Exact { config } => with_config(config, &cli, |cfg| cmd_exact(cfg, quiet)),
    };
    let status = match outcome.code {
        0 => "PASS",
        1 | 2 => "FAIL",
        _ => "ERROR",
    };
    println!("STATUS={status} REASON={}", outcome.reason);
    ExitCode::from(outcome.code)
}

fn load_config(path: &PathBuf, cli: &Cli) -> Result<RunConfig, Outcome> {
    match parse_config(path) {
        Ok(parsed) => {
            for w in &parsed.warnings {
                eprintln!("warning: {w}");
            }
            let mut cfg = parsed.config;
            if let Some(dir) = &cli.out_dir {
                cfg.output.out_dir = dir.clone();
            }
            if !cli.quiet {
                println!("effective config:\n{cfg}");
            }
            Ok(cfg)
        }
        Err(errors) => {
            for e in &errors {
                eprintln!("config error: {e}");
            }
            Err(Outcome::fail(3, "config"))
        }
    }
}

fn with_config(path: &PathBuf, cli: &Cli, f: impl FnOnce(RunConfig) -> Outcome) -> Outcome {
    match load_config(path, cli) {
        Ok(cfg) => f(cfg),
        Err(out) => out,
    }
}

fn initial_state(cfg: &RunConfig) -> Result<ScalarField, Outcome> {
    let cap = cfg
        .build_cap()
        .map_err(|e| Outcome::fail(2, reason_of(&e)))?;
    cfg.initial
        .build(cap)
        .map_err(|e| Outcome::fail(2, reason_of(&e)))
}

fn cmd_validate(cfg: RunConfig, quiet: bool) -> Outcome {
    let phi0 = match initial_state(&cfg) {
        Ok(phi0) => phi0,
        Err(out) => return out,
    };
    let cap = phi0.cap.clone();
    let report = check_admissible(&phi0);
    let nbc_tol = cfg.nbc_tol(cap.dr);
    if !quiet {
        println!(
            "admissibility: max|Dphi| = {:.6e}, eigmin iota = {:.6e}, Q in [{:.6e}, {:.6e}]",
            report.max_grad, report.eigmin_iota, report.min_q, report.max_q
        );
        println!(
            "boundary: residual = {:.6e} (tolerance {:.6e})",
            report.nbc_residual, nbc_tol
        );
    }
    // Boundary first: if the data violates the Neumann condition, the
    // mirrored ghost ring is a fiction and the interior checks below would
    // report artifacts of the kink rather than properties of the data.
    if report.nbc_residual > nbc_tol {
        return Outcome::fail(2, "neumann_boundary");
    }
    if let Some(e) = &report.failure {
        eprintln!("inadmissible initial state: {e}");
        return Outcome::fail(2, reason_of(e));
    }
    if report.eigmin_iota <= cfg.tolerances.admissible_floor {
        return Outcome::fail(2, "non_convex");
    }
    Outcome::pass()
}

fn cmd_run(cfg: RunConfig, quiet: bool) -> Outcome {
    let phi0 = match initial_state(&cfg) {
        Ok(phi0) => phi0,
        Err(out) => return out,
    };
    let cap = phi0.cap.clone();
    let baselines = match Baselines::of(&phi0) {
        Ok(b) => b,
        Err(e) => return Outcome::fail(2, reason_of(&e)),
    };
    let outcome = match run_flow(phi0, &cfg.flow) {
        Ok(o) => o,
        Err(e) => return Outcome::fail(2, reason_of(&e)),
    };
    if outcome.state.steps == 0 {
        // The initial state itself was rejected: validation failure.
        if let Some(e) = &outcome.failure {
            eprintln!("initial state rejected: {e}");
            return Outcome::fail(2, reason_of(e));
        }
    }

    let series_path = cfg.output.out_dir.join("series.csv");
    if let Err(e) = csvio::write_series(&outcome.series, &series_path) {
        eprintln!("cannot write {}: {e}", series_path.display());
        return Outcome::fail(3, "io");
    }
    let mut requested = cfg.output.snapshot_times.clone();
    requested.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (i, snap) in outcome.snapshots.iter().enumerate() {
        let path = cfg.output.out_dir.join(format!("snapshot_{i:03}.csv"));
        if let Err(e) = csvio::write_snapshot(snap, requested[i], &path) {
            eprintln!("cannot write {}: {e}", path.display());
            return Outcome::fail(3, "io");
        }
    }

    let dt_used = outcome
        .series
        .samples
        .iter()
        .map(|s| s.dt)
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let delta = cfg.delta(cap.dr, dt_used);
    let nbc_tol = cfg.nbc_tol(cap.dr);
    let report = estimate_report(&outcome.series, &baselines, delta, nbc_tol);
    if !quiet {
        println!(
            "run: {} steps to t = {}, series -> {}",
            outcome.state.steps,
            outcome.state.t,
            series_path.display()
        );
        for check in &report.checks {
            println!(
                "monitor {:<24} excess {:+.6e}  {}",
                check.name,
                check.excess,
                if check.pass { "pass" } else { "FAIL" }
            );
        }
    }
    if let Some(check) = report.first_failure() {
        return Outcome::fail(1, check.name);
    }
    if let Some(e) = &outcome.failure {
        eprintln!("flow stopped early: {e}");
        return Outcome::fail(2, reason_of(e));
    }
    Outcome::pass()
}

fn cmd_compare(low_path: &PathBuf, high_path: &PathBuf, seed: Option<u64>, cli: &Cli) -> Outcome {
    let low_cfg = match load_config(low_path, cli) {
        Ok(c) => c,
        Err(out) => return out,
    };
    let high_cfg = match load_config(high_path, cli) {
        Ok(c) => c,
        Err(out) => return out,
    };
    let same_grid = low_cfg.grid.n == high_cfg.grid.n
        && low_cfg.grid.r_max == high_cfg.grid.r_max
        && low_cfg.grid.nr == high_cfg.grid.nr
        && low_cfg.grid.ntheta == high_cfg.grid.ntheta;
    if !same_grid {
        eprintln!("comparison requires identical grids");
        return Outcome::fail(3, "grid_mismatch");
    }
    let cap = match low_cfg.build_cap() {
        Ok(c) => c,
        Err(e) => return Outcome::fail(2, reason_of(&e)),
    };
    let (phi_low, phi_high) = if let Some(seed) = seed {
        match random_admissible_pair(&cap, seed) {
            Ok(pair) => pair,
            Err(e) => return Outcome::fail(2, reason_of(&e)),
        }
    } else {
        let low = match low_cfg.initial.build(cap.clone()) {
            Ok(f) => f,
            Err(e) => return Outcome::fail(2, reason_of(&e)),
        };
        let high = match high_cfg.initial.build(cap) {
            Ok(f) => f,
            Err(e) => return Outcome::fail(2, reason_of(&e)),
        };
        (low, high)
    };
    let ordered = phi_low
        .values
        .iter()
        .zip(&phi_high.values)
        .all(|(l, h)| l <= h);
    if !ordered {
        eprintln!("initial data are not ordered: phi_low must not exceed phi_high anywhere");
        return Outcome::fail(2, "not_ordered");
    }
    let out = match comparison_check(&phi_low, &phi_high, &low_cfg.flow) {
        Ok(o) => o,
        Err(e) => return Outcome::fail(2, reason_of(&e)),
    };
    let tol = low_cfg.delta(phi_low.cap.dr, low_cfg.flow.dt_max);
    if !cli.quiet {
        println!(
            "comparison: initial gap {:.6e}, final gap {:.6e}, worst gap {:.6e} (tolerance -{:.6e}, {} steps)",
            out.initial_gap, out.final_gap, out.worst_gap, tol, out.steps
        );
    }
    if out.worst_gap < -tol {
        return Outcome::fail(1, "comparison");
    }
    Outcome::pass()
}

fn cmd_refine(cfg: RunConfig, levels: u32, quiet: bool) -> Outcome {
    if levels == 0 {
        eprintln!("refine needs at least one level");
        return Outcome::fail(3, "config");
    }
    let mut k_gaps = Vec::new();
    let mut worst_outcome: Option<Outcome> = None;
    if !quiet {
        println!("level,nr,ntheta,k_gap,g_gap,h_gap,gauss_residual,worst_monitor_excess");
    }
    for level in 0..levels {
        let mut level_cfg = cfg.clone();
        level_cfg.grid.nr = cfg.grid.nr << level;
        level_cfg.grid.ntheta = cfg.grid.ntheta << level;
        let phi0 = match initial_state(&level_cfg) {
            Ok(f) => f,
            Err(out) => return out,
        };
        let cap = phi0.cap.clone();
        let u0 = phi0.map(f64::exp);
        let cc = match curvature_consistency(&u0) {
            Ok(cc) => cc,
            Err(e) => return Outcome::fail(2, reason_of(&e)),
        };
        let baselines = match Baselines::of(&phi0) {
            Ok(b) => b,
            Err(e) => return Outcome::fail(2, reason_of(&e)),
        };
        let outcome = match run_flow(phi0, &level_cfg.flow) {
            Ok(o) => o,
            Err(e) => return Outcome::fail(2, reason_of(&e)),
        };
        let dt_used = outcome
            .series
            .samples
            .iter()
            .map(|s| s.dt)
            .fold(0.0f64, f64::max)
            .max(f64::MIN_POSITIVE);
        let report = estimate_report(
            &outcome.series,
            &baselines,
            level_cfg.delta(cap.dr, dt_used),
            level_cfg.nbc_tol(cap.dr),
        );
        let worst_excess = report
            .checks
            .iter()
            .map(|c| c.excess)
            .fold(f64::NEG_INFINITY, f64::max);
        if !quiet {
            println!(
                "{level},{},{},{:.6e},{:.6e},{:.6e},{:.6e},{:+.6e}",
                level_cfg.grid.nr,
                level_cfg.grid.ntheta,
                cc.k_gap,
                cc.g_gap,
                cc.h_gap,
                cc.gauss_residual,
                worst_excess
            );
        }
        k_gaps.push(cc.k_gap);
        if worst_outcome.is_none() {
            if let Some(check) = report.first_failure() {
                worst_outcome = Some(Outcome::fail(1, check.name));
            } else if let Some(e) = &outcome.failure {
                worst_outcome = Some(Outcome::fail(2, reason_of(e)));
            }
        }
    }
    if !quiet {
        for (i, pair) in k_gaps.windows(2).enumerate() {
            let order = (pair[0] / pair[1]).log2();
            println!("order level {} -> {}: {:.3}", i, i + 1, order);
        }
    }
    worst_outcome.unwrap_or_else(Outcome::pass)
}

fn cmd_exact(cfg: RunConfig, quiet: bool) -> Outcome {
    let cap = match cfg.build_cap() {
        Ok(c) => c,
        Err(e) => return Outcome::fail(2, reason_of(&e)),
    };
    if cfg.initial.eps_r != 0.0 || cfg.initial.eps_theta != 0.0 || cfg.initial.ramp != 0.0 {
        eprintln!("exact ignores the perturbation parameters and runs constant data");
    }
    let log_c = cfg.initial.c.ln();
    let phi0 = ScalarField::constant(cap, log_c);
    let mut flow_cfg = cfg.flow.clone();
    flow_cfg.mode = FlowMode::Raw;
    let outcome = match run_flow(phi0, &flow_cfg) {
        Ok(o) => o,
        Err(e) => return Outcome::fail(2, reason_of(&e)),
    };
    if let Some(e) = &outcome.failure {
        eprintln!("flow stopped early: {e}");
        return Outcome::fail(2, reason_of(e));
    }
    // Along the exact solution u·eᵗ ≡ c, so the series itself carries the
    // error history; the final state gives the pointwise check.
    let mut err = 0.0f64;
    for s in &outcome.series.samples {
        err = err
            .max((s.min_u_et.ln() - log_c).abs())
            .max((s.max_u_et.ln() - log_c).abs());
    }
    let target = log_c - outcome.state.t;
    for &v in &outcome.state.phi.values {
        err = err.max((v - target).abs());
    }
    let tol = 5.0 * flow_cfg.dt_max;
    if !quiet {
        println!(
            "exact: max|phi - (log c - t)| = {err:.6e} over {} steps (tolerance {tol:.6e})",
            outcome.state.steps
        );
    }
    if err > tol {
        return Outcome::fail(1, "exact_error");
    }
    Outcome::pass()
}
