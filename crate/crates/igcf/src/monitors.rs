//! Runtime verification: monitor rows sampled along a run, the a priori
//! estimate checks evaluated on them, the two-solution comparison principle,
//! and cross-route curvature consistency.

use crate::cap::HyperbolicCap;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::flow::{FlowConfig, FlowMode};
use crate::geometry::{gauss_curvature_phi_of_bundle, GeometryBundle};
use crate::ops::DiffScheme;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// One row of the monitor series. `u_et` columns track u·eᵗ in raw mode and
/// ũ in rescaled mode, the quantity pinched by the C⁰ estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorSample {
    pub t: f64,
    pub dt: f64,
    pub min_u_et: f64,
    pub max_u_et: f64,
    pub sup_grad: f64,
    pub min_q: f64,
    pub max_q: f64,
    pub min_det_iota: f64,
    pub max_det_iota: f64,
    pub eigmin_iota: f64,
    pub osc_phi_tilde: f64,
    pub nbc_residual: f64,
}

#[derive(Debug, Clone, Default)]
pub struct MonitorSeries {
    pub samples: Vec<MonitorSample>,
}

impl MonitorSeries {
    pub fn push(&mut self, sample: MonitorSample) {
        self.samples.push(sample);
    }

    pub fn last(&self) -> Option<&MonitorSample> {
        self.samples.last()
    }
}

/// Measure one state. The bundle is evaluated on the pole-safe scheme — the
/// same discrete operator the stepper uses — so the max-principle checks see
/// the quantities the scheme actually propagates; stride-1 stencils would
/// amplify harmless node-scale jitter near the pole by 1/sinh²r.
pub fn sample_state(phi: &ScalarField, t: f64, dt: f64, mode: FlowMode) -> MonitorSample {
    let bundle = GeometryBundle::evaluate_raw(phi, &DiffScheme::pole_safe(&phi.cap));
    let shift = match mode {
        FlowMode::Raw => t,
        FlowMode::Rescaled => 0.0,
    };
    let min_phi = phi.min();
    let max_phi = phi.max();
    MonitorSample {
        t,
        dt,
        min_u_et: (min_phi + shift).exp(),
        max_u_et: (max_phi + shift).exp(),
        sup_grad: bundle.max_grad_sq.max(0.0).sqrt(),
        min_q: bundle.min_q,
        max_q: bundle.max_q,
        min_det_iota: bundle.min_det_iota,
        max_det_iota: bundle.max_det_iota,
        eigmin_iota: bundle.eigmin_iota,
        osc_phi_tilde: max_phi - min_phi,
        nbc_residual: neumann_residual(phi),
    }
}

/// One-sided boundary derivative residual: the r-derivative at r = r_max from
/// a quadratic through the last three cell centers of each θ column,
/// f′(r_max) ≈ (f₋₂ − 3f₋₁ + 2f₀)/Δr (−2, −1, 0 counting inward from the
/// boundary ring). Independent of the ghost construction.
pub fn neumann_residual(phi: &ScalarField) -> f64 {
    let cap = &phi.cap;
    let nt = cap.ntheta;
    let c0 = (cap.nr - 1) * nt;
    let c1 = (cap.nr - 2) * nt;
    let c2 = (cap.nr - 3) * nt;
    let mut worst: f64 = 0.0;
    for k in 0..nt {
        let fit =
            (phi.values[c2 + k] - 3.0 * phi.values[c1 + k] + 2.0 * phi.values[c0 + k]) / cap.dr;
        worst = worst.max(fit.abs());
    }
    worst
}

/// Reference values frozen from the initial state; all later monitor rows are
/// judged against these.
#[derive(Debug, Clone, Copy)]
pub struct Baselines {
    pub n: u32,
    pub min_u0: f64,
    pub max_u0: f64,
    pub rho0: f64,
    pub q_min0: f64,
    pub q_max0: f64,
    pub det_sigma_min: f64,
    pub det_sigma_max: f64,
}

impl Baselines {
    pub fn of(phi0: &ScalarField) -> Result<Self> {
        let bundle = GeometryBundle::evaluate(phi0, &DiffScheme::pole_safe(&phi0.cap))?;
        let cap = &phi0.cap;
        let det_sigma_min = cap
            .rings
            .iter()
            .map(|r| r.det_sigma)
            .fold(f64::INFINITY, f64::min);
        let det_sigma_max = cap
            .rings
            .iter()
            .map(|r| r.det_sigma)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            n: cap.n,
            min_u0: phi0.min().exp(),
            max_u0: phi0.max().exp(),
            rho0: bundle.max_grad_sq.max(0.0).sqrt(),
            q_min0: bundle.min_q,
            q_max0: bundle.max_q,
            det_sigma_min,
            det_sigma_max,
        })
    }
}

#[derive(Debug, Clone)]
pub struct EstimateCheck {
    pub name: &'static str,
    /// Worst signed excess over the admitted bound; ≤ 0 is comfortable.
    pub excess: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct EstimateReport {
    pub checks: Vec<EstimateCheck>,
    pub delta: f64,
}

impl EstimateReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&EstimateCheck> {
        self.checks.iter().find(|c| !c.pass)
    }
}

/// Evaluate the a priori estimates on a monitor series with additive
/// discretization slack `delta` and boundary tolerance `nbc_tol`.
pub fn estimate_report(
    series: &MonitorSeries,
    base: &Baselines,
    delta: f64,
    nbc_tol: f64,
) -> EstimateReport {
    let rows = &series.samples;
    let np1 = base.n as i32 + 1;
    let det_lower =
        base.det_sigma_min * (1.0 - base.rho0 * base.rho0).powi(np1) / (-base.q_min0).powi(base.n as i32);
    let det_upper = base.det_sigma_max / (-base.q_max0).powi(base.n as i32);

    let mut pinch: f64 = f64::NEG_INFINITY;
    let mut grad: f64 = f64::NEG_INFINITY;
    let mut spacelike: f64 = f64::NEG_INFINITY;
    let mut phi_dot: f64 = f64::NEG_INFINITY;
    let mut det_window: f64 = f64::NEG_INFINITY;
    let mut convexity: f64 = f64::NEG_INFINITY;
    let mut nbc: f64 = f64::NEG_INFINITY;
    for s in rows {
        pinch = pinch
            .max(base.min_u0 - s.min_u_et)
            .max(s.max_u_et - base.max_u0);
        grad = grad.max(s.sup_grad - base.rho0);
        spacelike = spacelike.max(s.sup_grad - 1.0);
        phi_dot = phi_dot
            .max(base.q_min0 - s.min_q)
            .max(s.max_q - base.q_max0);
        det_window = det_window
            .max(det_lower - s.min_det_iota)
            .max(s.max_det_iota - det_upper);
        convexity = convexity.max(-s.eigmin_iota);
        nbc = nbc.max(s.nbc_residual - nbc_tol);
    }
    // Oscillation monotonicity after the initial transient (first 1 % of the
    // time interval, where the projection of rough data shuffles extrema).
    let t_end = rows.last().map_or(0.0, |s| s.t);
    let mut osc: f64 = f64::NEG_INFINITY;
    let mut prev: Option<f64> = None;
    for s in rows {
        if s.t < 0.01 * t_end {
            continue;
        }
        if let Some(p) = prev {
            osc = osc.max(s.osc_phi_tilde - p);
        }
        prev = Some(s.osc_phi_tilde);
    }

    let mk = |name: &'static str, excess: f64, tol: f64| EstimateCheck {
        name,
        excess,
        pass: excess <= tol,
    };
    EstimateReport {
        checks: vec![
            mk("c0_pinching", pinch, delta),
            mk("gradient_max_principle", grad, delta),
            mk("spacelike", spacelike, 0.0),
            mk("phi_dot_range", phi_dot, delta),
            mk("det_iota_window", det_window, delta),
            mk("convexity", convexity, 0.0),
            mk("osc_monotone", osc, delta),
            mk("neumann_boundary", nbc, 0.0),
        ],
        delta,
    }
}

/// Outcome of running two ordered solutions in lockstep.
#[derive(Debug, Clone, Copy)]
pub struct ComparisonOutcome {
    pub initial_gap: f64,
    pub final_gap: f64,
    /// Most negative node gap φ_high − φ_low seen at any recorded time.
    pub worst_gap: f64,
    pub steps: u64,
}

fn min_gap(low: &ScalarField, high: &ScalarField) -> f64 {
    low.values
        .iter()
        .zip(&high.values)
        .map(|(l, h)| h - l)
        .fold(f64::INFINITY, f64::min)
}

/// March φ_low and φ_high with a shared step size and record the worst node
/// gap; for an ordered pair the comparison principle keeps it nonnegative up
/// to discretization error.
pub fn comparison_check(
    phi_low: &ScalarField,
    phi_high: &ScalarField,
    config: &FlowConfig,
) -> Result<ComparisonOutcome> {
    config.validate()?;
    let cap = phi_low.cap.clone();
    let scheme = DiffScheme::pole_safe(&cap);
    let mut low = phi_low.clone();
    let mut high = phi_high.clone();
    let initial_gap = min_gap(&low, &high);
    let mut worst_gap = initial_gap;
    let mut t = 0.0;
    let mut steps = 0u64;
    while t < config.t_final {
        let bl = GeometryBundle::evaluate_raw(&low, &scheme);
        let bh = GeometryBundle::evaluate_raw(&high, &scheme);
        bl.admissible().map_err(|e| Error::StepFailed {
            t,
            dt: 0.0,
            source: Box::new(e),
        })?;
        bh.admissible().map_err(|e| Error::StepFailed {
            t,
            dt: 0.0,
            source: Box::new(e),
        })?;
        let dt = crate::flow::adaptive_dt(&bl, &scheme, config)
            .min(crate::flow::adaptive_dt(&bh, &scheme, config))
            .min(config.t_final - t);
        low = crate::flow::euler_step_from_bundle(&low, &bl, config.mode, dt);
        high = crate::flow::euler_step_from_bundle(&high, &bh, config.mode, dt);
        t = if config.t_final - t <= dt * (1.0 + 1e-12) {
            config.t_final
        } else {
            t + dt
        };
        steps += 1;
        worst_gap = worst_gap.min(min_gap(&low, &high));
    }
    Ok(ComparisonOutcome {
        initial_gap,
        final_gap: min_gap(&low, &high),
        worst_gap,
        steps,
    })
}

/// How well the three curvature routes and the two (g, h) routes agree.
#[derive(Debug, Clone, Copy)]
pub struct CurvatureConsistency {
    /// Largest pairwise gap between K(u-form), K(φ-form) and K(embedding).
    pub k_gap: f64,
    pub g_gap: f64,
    pub h_gap: f64,
    pub gauss_residual: f64,
}

pub fn curvature_consistency(u: &ScalarField) -> Result<CurvatureConsistency> {
    let phi = u.map(f64::ln);
    let scheme = DiffScheme::uniform(&u.cap);
    let k_u = crate::geometry::gauss_curvature_u(u)?;
    let bundle = GeometryBundle::evaluate(&phi, &scheme)?;
    let k_phi = gauss_curvature_phi_of_bundle(&bundle, &phi.values);
    let report = crate::embedding::embedding_oracle(u)?;
    let (g, _) = crate::geometry::induced_metric(u)?;
    let h = crate::geometry::second_fundamental(u)?;

    let mut k_gap: f64 = 0.0;
    let mut g_gap: f64 = 0.0;
    let mut h_gap: f64 = 0.0;
    for idx in 0..u.values.len() {
        let (a, b, c) = (k_u.values[idx], k_phi[idx], report.k.values[idx]);
        k_gap = k_gap
            .max((a - b).abs())
            .max((a - c).abs())
            .max((b - c).abs());
        let (gm, ge) = (g.mats[idx], report.g.mats[idx]);
        let (hm, he) = (h.mats[idx], report.h.mats[idx]);
        g_gap = g_gap
            .max((gm.a11 - ge.a11).abs())
            .max((gm.a12 - ge.a12).abs())
            .max((gm.a22 - ge.a22).abs());
        h_gap = h_gap
            .max((hm.a11 - he.a11).abs())
            .max((hm.a12 - he.a12).abs())
            .max((hm.a22 - he.a22).abs());
    }
    let gauss_residual = crate::embedding::gauss_formula_residual(u)?;
    Ok(CurvatureConsistency {
        k_gap,
        g_gap,
        h_gap,
        gauss_residual,
    })
}

/// Draw one admissible Neumann-compatible profile from a seeded stream.
fn random_profile(cap: &Arc<HyperbolicCap>, rng: &mut ChaCha8Rng) -> ScalarField {
    let r_max = cap.r_max;
    let c: f64 = rng.gen_range(0.7..1.4);
    let eps_r: f64 = rng.gen_range(-0.05..0.05);
    let eps_t: f64 = rng.gen_range(-0.02..0.02);
    let k = rng.gen_range(1..=3) as f64;
    let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let (sh, ch) = (r_max.sinh(), r_max.cosh());
    let gamma = -k * ch / (2.0 * r_max * sh + k * ch * r_max * r_max);
    let pi = std::f64::consts::PI;
    ScalarField::from_fn(cap.clone(), move |r, t| {
        c.ln()
            + eps_r * (pi * r / r_max).cos()
            + eps_t * r.sinh().powf(k) * (1.0 + gamma * r * r) * (k * t - phase).cos()
    })
}

/// Seeded ordered pair of admissible initial profiles with φ_low ≤ φ_high −
/// margin pointwise (the upper one is a constant lift of an independent draw,
/// which preserves both admissibility and the boundary condition).
pub fn random_admissible_pair(
    cap: &Arc<HyperbolicCap>,
    seed: u64,
) -> Result<(ScalarField, ScalarField)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..32 {
        let low = random_profile(cap, &mut rng);
        let high_raw = random_profile(cap, &mut rng);
        let lift = low.max() - high_raw.min() + 0.05;
        let high = high_raw.map(|v| v + lift);
        let ok = crate::flow::check_admissible(&low).is_admissible()
            && crate::flow::check_admissible(&high).is_admissible();
        if ok {
            return Ok((low, high));
        }
    }
    Err(Error::InvalidParameter(format!(
        "no admissible pair found for seed {seed}"
    )))
}
