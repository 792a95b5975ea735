//! Explicit time stepping for ∂φ/∂t = Q(Dφ, D²φ) with zero Neumann boundary
//! data, in raw form or rescaled form (∂φ̃/∂t = Q + 1, φ̃ = φ + t).

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::GeometryBundle;
use crate::monitors::{neumann_residual, sample_state, MonitorSeries};
use crate::ops::DiffScheme;
use std::sync::Arc;

use crate::cap::HyperbolicCap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowMode {
    /// φ_t = Q; the cap collapses toward the light cone as t grows.
    Raw,
    /// φ̃_t = Q + 1; round caps are fixed points and oscillations decay.
    Rescaled,
}

#[derive(Debug, Clone)]
pub struct FlowConfig {
    pub mode: FlowMode,
    pub t_final: f64,
    /// CFL safety factor; values above 1 run the stepper outside its
    /// stability region (useful only as a negative control).
    pub dt_safety: f64,
    pub dt_max: f64,
    /// Record a monitor row every this many steps (plus first and last).
    pub monitor_stride: usize,
    pub snapshot_times: Vec<f64>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            mode: FlowMode::Raw,
            t_final: 1.0,
            dt_safety: 0.8,
            dt_max: 1e-3,
            monitor_stride: 50,
            snapshot_times: Vec::new(),
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t_final must be positive, got {}",
                self.t_final
            )));
        }
        if !(self.dt_safety > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt_safety must be positive, got {}",
                self.dt_safety
            )));
        }
        if !(self.dt_max > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt_max must be positive, got {}",
                self.dt_max
            )));
        }
        if self.monitor_stride == 0 {
            return Err(Error::InvalidParameter(
                "monitor_stride must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Compatible perturbed initial data
/// φ₀ = ln c + ε_r cos(πr/r_max) + ε_θ sinhᵏr·(1 + γr²)·cos kθ,
/// with γ chosen so ∂_r φ₀(r_max) = 0 analytically; the optional `ramp`
/// term β(r/r_max)² deliberately violates the Neumann condition and exists
/// only for negative controls.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub c: f64,
    pub eps_r: f64,
    pub eps_theta: f64,
    pub k: u32,
    pub ramp: f64,
}

impl Default for InitialData {
    fn default() -> Self {
        Self {
            c: 1.0,
            eps_r: 0.05,
            eps_theta: 0.02,
            k: 2,
            ramp: 0.0,
        }
    }
}

impl InitialData {
    pub fn build(&self, cap: Arc<HyperbolicCap>) -> Result<ScalarField> {
        if !(self.c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "radius scale c must be positive, got {}",
                self.c
            )));
        }
        if self.k == 0 {
            return Err(Error::InvalidParameter(
                "angular wavenumber k must be at least 1".into(),
            ));
        }
        let r_max = cap.r_max;
        let kf = self.k as f64;
        let (sh, ch) = (r_max.sinh(), r_max.cosh());
        let gamma = -kf * ch / (2.0 * r_max * sh + kf * ch * r_max * r_max);
        let (log_c, eps_r, eps_t, kw, ramp) = ((self.c).ln(), self.eps_r, self.eps_theta, kf, self.ramp);
        let pi = std::f64::consts::PI;
        Ok(ScalarField::from_fn(cap, move |r, t| {
            log_c
                + eps_r * (pi * r / r_max).cos()
                + eps_t * r.sinh().powi(kw as i32) * (1.0 + gamma * r * r) * (kw * t).cos()
                + ramp * (r / r_max) * (r / r_max)
        }))
    }
}

/// What `check_admissible` measured; thresholds are the caller's business.
#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    pub max_grad: f64,
    pub eigmin_iota: f64,
    pub min_q: f64,
    pub max_q: f64,
    pub nbc_residual: f64,
    pub failure: Option<Error>,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        self.failure.is_none()
    }
}

/// Evaluate spacelikeness, strict convexity and the boundary residual on the
/// uniform (stride-1) scheme.
pub fn check_admissible(phi: &ScalarField) -> AdmissibilityReport {
    let bundle = GeometryBundle::evaluate_raw(phi, &DiffScheme::uniform(&phi.cap));
    AdmissibilityReport {
        max_grad: bundle.max_grad_sq.max(0.0).sqrt(),
        eigmin_iota: bundle.eigmin_iota,
        min_q: bundle.min_q,
        max_q: bundle.max_q,
        nbc_residual: neumann_residual(phi),
        failure: bundle.admissible().err(),
    }
}

/// Stable explicit step size:
/// dt = min(dt_max, safety · h_eff² / (2n · Λ_max)), with Λ_max the largest
/// nodewise eigenvalue of the linearized operator in the chart and h_eff the
/// effective smallest grid spacing of the scheme.
pub fn adaptive_dt(bundle: &GeometryBundle, scheme: &DiffScheme, config: &FlowConfig) -> f64 {
    let lam = bundle.parabolicity_lambda_max();
    let n = bundle.n as f64;
    let cfl = config.dt_safety * scheme.h_eff * scheme.h_eff / (2.0 * n * lam);
    config.dt_max.min(cfl)
}

/// One forward-Euler step of the chosen mode from an evaluated bundle.
pub fn euler_step_from_bundle(
    phi: &ScalarField,
    bundle: &GeometryBundle,
    mode: FlowMode,
    dt: f64,
) -> ScalarField {
    let shift = match mode {
        FlowMode::Raw => 0.0,
        FlowMode::Rescaled => 1.0,
    };
    ScalarField {
        cap: phi.cap.clone(),
        values: phi
            .values
            .iter()
            .zip(&bundle.q)
            .map(|(p, q)| p + dt * (q + shift))
            .collect(),
    }
}

/// One forward-Euler step, evaluating the bundle on `scheme` first.
pub fn euler_step(
    phi: &ScalarField,
    scheme: &DiffScheme,
    mode: FlowMode,
    dt: f64,
) -> Result<ScalarField> {
    let bundle = GeometryBundle::evaluate(phi, scheme)?;
    Ok(euler_step_from_bundle(phi, &bundle, mode, dt))
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub phi: ScalarField,
}

#[derive(Debug, Clone)]
pub struct FlowState {
    pub phi: ScalarField,
    pub t: f64,
    pub steps: u64,
}

#[derive(Debug)]
pub struct FlowOutcome {
    pub series: MonitorSeries,
    pub snapshots: Vec<Snapshot>,
    pub state: FlowState,
    /// Set when the run stopped before t_final; the series holds everything
    /// recorded up to the failure.
    pub failure: Option<Error>,
}

impl FlowOutcome {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }
}

/// March the flow from φ₀ to t_final with adaptive explicit stepping.
///
/// The stepper uses the pole-safe scheme; monitor rows are measured on the
/// uniform scheme. An inadmissible candidate state is retried once at dt/2
/// before the run is abandoned with the partial series.
pub fn run_flow(phi0: ScalarField, config: &FlowConfig) -> Result<FlowOutcome> {
    config.validate()?;
    let cap = phi0.cap.clone();
    let scheme = DiffScheme::pole_safe(&cap);
    let mut series = MonitorSeries::default();
    let mut snapshots = Vec::new();
    let mut pending: Vec<f64> = config.snapshot_times.clone();
    pending.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut phi = phi0;
    let mut t = 0.0;
    let mut steps: u64 = 0;
    let mut dt_last = 0.0;
    let mut failure: Option<Error> = None;

    let mut bundle = GeometryBundle::evaluate_raw(&phi, &scheme);
    if let Err(e) = bundle.admissible() {
        series.push(sample_state(&phi, t, 0.0, config.mode));
        return Ok(FlowOutcome {
            series,
            snapshots,
            state: FlowState { phi, t, steps },
            failure: Some(e),
        });
    }
    series.push(sample_state(&phi, t, dt_last, config.mode));

    while t < config.t_final {
        let mut dt = adaptive_dt(&bundle, &scheme, config).min(config.t_final - t);
        let mut accepted = None;
        for _ in 0..2 {
            let candidate = euler_step_from_bundle(&phi, &bundle, config.mode, dt);
            let cand_bundle = GeometryBundle::evaluate_raw(&candidate, &scheme);
            match cand_bundle.admissible() {
                Ok(()) if candidate.is_finite() => {
                    accepted = Some((candidate, cand_bundle));
                    break;
                }
                Ok(()) => {
                    failure = Some(Error::StepFailed {
                        t,
                        dt,
                        source: Box::new(Error::InvalidParameter(
                            "non-finite state".into(),
                        )),
                    });
                    break;
                }
                Err(e) => {
                    failure = Some(Error::StepFailed {
                        t,
                        dt,
                        source: Box::new(e),
                    });
                    dt *= 0.5;
                }
            }
        }
        let Some((candidate, cand_bundle)) = accepted else {
            break;
        };
        failure = None;
        t = if config.t_final - t <= dt * (1.0 + 1e-12) {
            config.t_final
        } else {
            t + dt
        };
        phi = candidate;
        bundle = cand_bundle;
        steps += 1;
        dt_last = dt;

        while pending.first().is_some_and(|&ts| t >= ts) {
            pending.remove(0);
            snapshots.push(Snapshot {
                t,
                phi: phi.clone(),
            });
        }
        if steps % config.monitor_stride as u64 == 0 || t >= config.t_final {
            series.push(sample_state(&phi, t, dt_last, config.mode));
        }
    }
    if failure.is_some() {
        // Record the last healthy state so the series ends where the run did.
        series.push(sample_state(&phi, t, dt_last, config.mode));
    }
    Ok(FlowOutcome {
        series,
        snapshots,
        state: FlowState { phi, t, steps },
        failure,
    })
}

/// Map a raw-flow state at time t to rescaled variables:
/// φ̃ = φ + t and ũ = e^{φ̃} = u·eᵗ.
pub fn rescale_state(phi: &ScalarField, t: f64) -> (ScalarField, ScalarField) {
    let phi_tilde = phi.map(|v| v + t);
    let u_tilde = phi_tilde.map(f64::exp);
    (phi_tilde, u_tilde)
}
