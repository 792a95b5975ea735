//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N (<name>): PASS|FAIL` line before asserting.
//!
//! Criteria 2–5 all inspect the same perturbed raw run, so that run is shared
//! per grid level through a `OnceLock`.

use std::path::Path;
use std::process::Command;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use igcf::{
    build_cap, comparison_check, curvature_consistency, embedding_oracle_analytic,
    estimate_report, euler_step, gauss_curvature_phi, gauss_curvature_u, random_admissible_pair,
    rhs_q, run_flow, Baselines, Derivs, DiffScheme, EstimateReport, FlowConfig, FlowMode,
    HyperbolicCap, InitialData, MonitorSeries, ScalarField,
};

fn report(n: u32, name: &str, pass: bool) {
    println!("criterion {n} ({name}): {}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} ({name}) failed");
}

fn cap(nr: usize, ntheta: usize) -> Arc<HyperbolicCap> {
    Arc::new(build_cap(2, 1.0, nr, ntheta).unwrap())
}

/// One perturbed raw run to T = 3 at a given radial resolution, with the
/// additive slack δ = 10·(Δr² + dt_max) and the boundary tolerance 10·Δr².
struct LevelRun {
    series: MonitorSeries,
    report: EstimateReport,
    delta: f64,
}

fn perturbed_run(nr: usize) -> &'static LevelRun {
    static RUN32: OnceLock<LevelRun> = OnceLock::new();
    static RUN64: OnceLock<LevelRun> = OnceLock::new();
    let slot = match nr {
        32 => &RUN32,
        64 => &RUN64,
        _ => panic!("unexpected level {nr}"),
    };
    slot.get_or_init(|| {
        let cap = cap(nr, 2 * nr);
        let phi0 = InitialData::default().build(cap.clone()).unwrap();
        let base = Baselines::of(&phi0).unwrap();
        let config = FlowConfig {
            mode: FlowMode::Raw,
            t_final: 3.0,
            monitor_stride: 25,
            ..FlowConfig::default()
        };
        let out = run_flow(phi0, &config).unwrap();
        assert!(out.completed(), "perturbed run at nr={nr} stopped early: {:?}", out.failure);
        let delta = 10.0 * (cap.dr * cap.dr + config.dt_max);
        let nbc_tol = 10.0 * cap.dr * cap.dr;
        let report = estimate_report(&out.series, &base, delta, nbc_tol);
        LevelRun { series: out.series, report, delta }
    })
}

fn check_passes(run: &LevelRun, name: &str) -> bool {
    run.report
        .checks
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("no monitor named {name}"))
        .pass
}

#[test]
fn exact_radial_solution() {
    let cap = cap(64, 128);
    let phi0 = ScalarField::constant(cap, 2.0f64.ln());
    let config = FlowConfig {
        mode: FlowMode::Raw,
        t_final: 1.0,
        dt_max: 1e-4,
        monitor_stride: 1000,
        ..FlowConfig::default()
    };
    let start = Instant::now();
    let out = run_flow(phi0, &config).unwrap();
    let elapsed = start.elapsed();
    let exact = 2.0f64.ln() - 1.0;
    let err = out
        .state
        .phi
        .values
        .iter()
        .map(|v| (v - exact).abs())
        .fold(0.0, f64::max);
    let pass = out.completed() && err <= 5e-4 && elapsed <= Duration::from_secs(60);
    println!("  max error {err:.3e}, runtime {elapsed:.2?}");
    report(1, "exact radial solution", pass);
}

#[test]
fn c0_pinching() {
    let coarse = perturbed_run(32);
    let fine = perturbed_run(64);
    let pass = check_passes(coarse, "c0_pinching")
        && check_passes(fine, "c0_pinching")
        && fine.delta < coarse.delta;
    report(2, "C0 pinching of u·e^t", pass);
}

#[test]
fn gradient_maximum_principle() {
    let mut pass = true;
    for nr in [32, 64] {
        let run = perturbed_run(nr);
        pass &= check_passes(run, "gradient_max_principle");
        pass &= check_passes(run, "spacelike");
        pass &= run.series.samples.iter().all(|s| s.sup_grad < 1.0);
    }
    report(3, "gradient maximum principle", pass);
}

#[test]
fn phi_dot_bounds() {
    let pass = check_passes(perturbed_run(32), "phi_dot_range")
        && check_passes(perturbed_run(64), "phi_dot_range");
    report(4, "time-derivative bounds", pass);
}

#[test]
fn det_iota_window() {
    let mut pass = true;
    for nr in [32, 64] {
        let run = perturbed_run(nr);
        pass &= check_passes(run, "det_iota_window");
        pass &= check_passes(run, "convexity");
        pass &= run.series.samples.iter().all(|s| s.eigmin_iota > 0.0);
    }
    report(5, "det iota window and strict convexity", pass);
}

#[test]
fn comparison_principle() {
    let cap = cap(32, 64);
    let config = FlowConfig {
        mode: FlowMode::Raw,
        t_final: 0.5,
        monitor_stride: 1000,
        ..FlowConfig::default()
    };
    let tol = 10.0 * (cap.dr * cap.dr + config.dt_max);
    let mut worst = f64::INFINITY;
    for seed in 0..20 {
        let (low, high) = random_admissible_pair(&cap, seed).unwrap();
        let out = comparison_check(&low, &high, &config).unwrap();
        worst = worst.min(out.worst_gap);
    }
    // A pair of round caps stays a pair of round caps: the gap is carried
    // along unchanged (up to roundoff in the shared shift).
    let low = ScalarField::constant(cap.clone(), 0.0);
    let high = ScalarField::constant(cap, 2.0f64.ln());
    let exact = comparison_check(&low, &high, &config).unwrap();
    let drift = (exact.final_gap - exact.initial_gap).abs();
    println!("  worst seeded gap {worst:.3e} (tol −{tol:.3e}), constant-pair drift {drift:.3e}");
    let pass = worst >= -tol && drift <= 1e-12 && exact.worst_gap >= exact.initial_gap - 1e-12;
    report(6, "comparison principle", pass);
}

#[test]
fn rescaled_convergence() {
    let cap = cap(32, 64);
    let phi0 = InitialData::default().build(cap.clone()).unwrap();
    let config = FlowConfig {
        mode: FlowMode::Rescaled,
        t_final: 10.0,
        monitor_stride: 50,
        ..FlowConfig::default()
    };
    let out = run_flow(phi0, &config).unwrap();
    let delta = 10.0 * (cap.dr * cap.dr + config.dt_max);
    let rows = &out.series.samples;
    let osc0 = rows.first().unwrap().osc_phi_tilde;
    let osc_end = rows.last().unwrap().osc_phi_tilde;
    let decayed = osc_end <= (1e-2 * osc0).max(1e-3);
    let transient = 0.01 * config.t_final;
    let monotone = rows
        .windows(2)
        .filter(|w| w[0].t >= transient)
        .all(|w| w[1].osc_phi_tilde <= w[0].osc_phi_tilde + delta);

    // A round cap is a fixed point of the rescaled flow to the last bit.
    let const0 = ScalarField::constant(cap, 1.5f64.ln());
    let const_out = run_flow(const0, &config).unwrap();
    let fixed_point = const_out
        .series
        .samples
        .iter()
        .all(|s| s.osc_phi_tilde == 0.0);

    println!("  osc(0) = {osc0:.3e}, osc(T) = {osc_end:.3e}");
    let pass = out.completed() && decayed && monotone && const_out.completed() && fixed_point;
    report(7, "rescaled oscillation decay", pass);
}

#[test]
fn curvature_oracle_suite() {
    // Five seeded graphs, each a fixed continuum profile sampled on every
    // level, so the three curvature routes can be compared under refinement.
    let mut pass = true;
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = InitialData {
            c: rng.gen_range(0.8..1.3),
            eps_r: rng.gen_range(-0.04..0.04),
            eps_theta: rng.gen_range(-0.015..0.015),
            k: rng.gen_range(1..=3),
            ramp: 0.0,
        };
        let mut gaps = Vec::new();
        for nr in [32usize, 64, 128] {
            let cap = cap(nr, 2 * nr);
            let u = data.build(cap).unwrap().map(f64::exp);
            gaps.push(curvature_consistency(&u).unwrap().k_gap);
        }
        let order = 0.5 * (gaps[0] / gaps[2]).log2();
        println!(
            "  seed {seed}: gaps {:.3e} {:.3e} {:.3e}, order {order:.2}",
            gaps[0], gaps[1], gaps[2]
        );
        pass &= gaps[0] > gaps[1] && gaps[1] > gaps[2];
        pass &= (1.8..=2.2).contains(&order);
    }

    // Analytic-derivative path on a round cap: u ≡ 2 has K = 1/4 on the nose.
    let cap = cap(64, 128);
    let u = ScalarField::constant(cap.clone(), 2.0);
    let k_u = gauss_curvature_u(&u).unwrap();
    pass &= k_u.values.iter().all(|&k| k == 0.25);
    let k_phi = gauss_curvature_phi(&u.map(f64::ln)).unwrap();
    pass &= k_phi.values.iter().all(|&k| (k - 0.25).abs() <= 1e-10);
    let derivs = Derivs::of(&u, &DiffScheme::uniform(&cap));
    let emb = embedding_oracle_analytic(&cap, &u.values, &derivs).unwrap();
    pass &= emb.k.values.iter().all(|&k| (k - 0.25).abs() <= 1e-10);
    pass &= emb.max_unit_residual <= 1e-10 && emb.max_tangency_residual <= 1e-10;
    report(8, "curvature oracle agreement", pass);
}

#[test]
fn exact_symmetries() {
    let cap = cap(32, 64);
    // Quantize so that adding a representable constant is exact per node.
    let quantum = (1u64 << 26) as f64;
    let phi = InitialData::default()
        .build(cap.clone())
        .unwrap()
        .map(|v| (v * quantum).round() / quantum);

    let q_base = rhs_q(&phi).unwrap();
    let q_shifted = rhs_q(&phi.map(|v| v + 0.5)).unwrap();
    let shift_invariant = q_base.values == q_shifted.values;

    let scheme = DiffScheme::pole_safe(&cap);
    let stepped_then_shifted = euler_step(&phi, &scheme, FlowMode::Raw, 1e-4)
        .unwrap()
        .theta_shifted(1);
    let shifted_then_stepped =
        euler_step(&phi.theta_shifted(1), &scheme, FlowMode::Raw, 1e-4).unwrap();
    let rotation_equivariant = stepped_then_shifted.values == shifted_then_stepped.values;

    report(9, "exact symmetries", shift_invariant && rotation_equivariant);
}

#[test]
fn negative_controls() {
    fn run_cli(args: &[&str], dir: &Path) -> (Option<i32>, String) {
        let out = Command::new(env!("CARGO_BIN_EXE_igcf"))
            .args(args)
            .current_dir(dir)
            .output()
            .expect("binary runs");
        let last = String::from_utf8_lossy(&out.stdout)
            .lines()
            .last()
            .unwrap_or_default()
            .to_string();
        (out.status.code(), last)
    }

    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        path.to_str().unwrap().to_string()
    };

    // Over-large time step: the run survives but leaves the estimate regime,
    // so some monitor fails and the run exits 1.
    let unstable = write(
        "unstable.toml",
        "[grid]\nnr = 24\nntheta = 48\n\n[flow]\nt_final = 1.0\ndt_safety = 5.0\ndt_max = 0.5\n",
    );
    let (code, line) = run_cli(&["run", &unstable, "--quiet"], dir.path());
    let dt_control = code == Some(1) && line.starts_with("STATUS=FAIL REASON=");

    // Boundary-violating data: validation rejects it by name.
    let ramped = write(
        "ramped.toml",
        "[grid]\nnr = 32\nntheta = 64\n\n[initial]\nramp = 0.2\n",
    );
    let (code, line) = run_cli(&["validate", &ramped, "--quiet"], dir.path());
    let nbc_control = code == Some(2) && line == "STATUS=FAIL REASON=neumann_boundary";

    // Non-convex data: a radial perturbation large enough to flip an
    // eigenvalue of ι while staying spacelike.
    let dented = write(
        "dented.toml",
        "[grid]\nnr = 32\nntheta = 64\n\n[initial]\neps_r = 0.25\n",
    );
    let (code, line) = run_cli(&["validate", &dented, "--quiet"], dir.path());
    let convexity_control = code == Some(2) && line == "STATUS=FAIL REASON=non_convex";

    report(10, "negative controls", dt_control && nbc_control && convexity_control);
}
