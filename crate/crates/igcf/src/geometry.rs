//! Graph geometry of the spacelike radial graph {u(x)·x : x ∈ M²}.
//!
//! Everything here is a pointwise map over (φ, Dφ, D²φ) or (u, Du, D²u);
//! the two curvature routes (u-form and φ-form) and the flow operator Q are
//! kept separate so they can cross-check each other.

use crate::cap::HyperbolicCap;
use crate::error::{Error, Result};
use crate::field::{apply_neumann_ghost, CovectorField, ScalarField, SymMatrixField};
use crate::ops::{raw_derivs, DiffScheme, SymMat2};
use std::sync::Arc;

/// Gradient and covariant Hessian of a field, as one unit.
#[derive(Debug, Clone)]
pub struct Derivs {
    pub grad: Vec<[f64; 2]>,
    pub hess: Vec<SymMat2>,
}

impl Derivs {
    /// Finite-difference derivatives (a single fused sweep of the stencils).
    pub fn of(f: &ScalarField, scheme: &DiffScheme) -> Self {
        let cap = &f.cap;
        let ext = apply_neumann_ghost(f);
        let n = f.values.len();
        let mut grad = Vec::with_capacity(n);
        let mut hess = Vec::with_capacity(n);
        for j in 0..cap.nr {
            let ring = &cap.rings[j];
            let s = scheme.strides[j];
            for k in 0..cap.ntheta {
                let (f_r, f_t, f_rr, f_rt, f_tt) = raw_derivs(&ext, cap, j, k, s);
                grad.push([f_r, f_t]);
                hess.push(SymMat2::new(
                    f_rr,
                    f_rt - ring.coth_r * f_t,
                    f_tt + ring.sinh_r * ring.cosh_r * f_r,
                ));
            }
        }
        Self { grad, hess }
    }

    /// Derivatives of u = e^φ from derivatives of φ (chain rule).
    pub fn exp_of_phi(phi_values: &[f64], phi_derivs: &Derivs) -> (Vec<f64>, Derivs) {
        let u: Vec<f64> = phi_values.iter().map(|&p| p.exp()).collect();
        let grad: Vec<[f64; 2]> = phi_derivs
            .grad
            .iter()
            .zip(&u)
            .map(|(g, &ui)| [ui * g[0], ui * g[1]])
            .collect();
        let hess: Vec<SymMat2> = phi_derivs
            .hess
            .iter()
            .zip(&phi_derivs.grad)
            .zip(&u)
            .map(|((h, g), &ui)| {
                SymMat2::new(
                    ui * (h.a11 + g[0] * g[0]),
                    ui * (h.a12 + g[0] * g[1]),
                    ui * (h.a22 + g[1] * g[1]),
                )
            })
            .collect();
        (u, Derivs { grad, hess })
    }
}

#[inline]
fn pow_np1_over_n(x: f64, n: u32) -> f64 {
    if n == 2 {
        x * x.sqrt()
    } else {
        x.powf((n as f64 + 1.0) / n as f64)
    }
}

#[inline]
fn nth_root(x: f64, n: u32) -> f64 {
    if n == 2 {
        x.sqrt()
    } else {
        x.powf(1.0 / n as f64)
    }
}

#[inline]
fn pow_np2_over_2(x: f64, n: u32) -> f64 {
    if n == 2 {
        x * x
    } else {
        x.powf((n as f64 + 2.0) / 2.0)
    }
}

/// ι_ij = φ_{;ij} + σ_ij − φ_i φ_j at one node.
#[inline]
fn iota_node(sigma_tt: f64, g: [f64; 2], h: SymMat2) -> SymMat2 {
    SymMat2::new(
        h.a11 + 1.0 - g[0] * g[0],
        h.a12 - g[0] * g[1],
        h.a22 + sigma_tt - g[1] * g[1],
    )
}

/// Q(Dφ, D²φ) = −(1−|Dφ|²)^{(n+1)/n} (det σ / det ι)^{1/n}.
#[inline]
fn q_node(n: u32, grad_sq: f64, det_iota: f64, det_sigma: f64) -> f64 {
    -pow_np1_over_n(1.0 - grad_sq, n) * nth_root(det_sigma / det_iota, n)
}

/// φ-form Gauss curvature K = e^{−nφ} (1−|Dφ|²)^{−(n+2)/2} det ι / det σ.
#[inline]
fn k_phi_node(n: u32, phi: f64, grad_sq: f64, det_iota: f64, det_sigma: f64) -> f64 {
    (-(n as f64) * phi).exp() / pow_np2_over_2(1.0 - grad_sq, n) * det_iota / det_sigma
}

/// All per-node flow geometry of one φ-state, plus grid-wide summaries.
#[derive(Debug, Clone)]
pub struct GeometryBundle {
    pub cap: Arc<HyperbolicCap>,
    pub n: u32,
    pub grad: Vec<[f64; 2]>,
    pub hess: Vec<SymMat2>,
    pub grad_sq: Vec<f64>,
    pub iota: Vec<SymMat2>,
    pub det_iota: Vec<f64>,
    /// Flow speed Q per node (NaN where the state is inadmissible).
    pub q: Vec<f64>,
    pub max_grad_sq: f64,
    pub worst_spacelike_node: usize,
    pub eigmin_iota: f64,
    pub worst_convex_node: usize,
    pub min_q: f64,
    pub max_q: f64,
    pub min_det_iota: f64,
    pub max_det_iota: f64,
}

impl GeometryBundle {
    /// Evaluate the bundle without failing; admissibility is judged afterwards.
    pub fn evaluate_raw(phi: &ScalarField, scheme: &DiffScheme) -> Self {
        let derivs = Derivs::of(phi, scheme);
        Self::from_derivs(phi.cap.clone(), derivs)
    }

    /// Same, with caller-supplied (e.g. analytic) derivatives.
    pub fn from_derivs(cap: Arc<HyperbolicCap>, derivs: Derivs) -> Self {
        let n = cap.n;
        let count = derivs.grad.len();
        let Derivs { grad, hess } = derivs;
        let mut grad_sq = Vec::with_capacity(count);
        let mut iota = Vec::with_capacity(count);
        let mut det_iota = Vec::with_capacity(count);
        let mut q = Vec::with_capacity(count);
        let mut max_grad_sq = f64::NEG_INFINITY;
        let mut worst_spacelike_node = 0;
        let mut eigmin_iota = f64::INFINITY;
        let mut worst_convex_node = 0;
        let mut min_q = f64::INFINITY;
        let mut max_q = f64::NEG_INFINITY;
        let mut min_det = f64::INFINITY;
        let mut max_det = f64::NEG_INFINITY;
        let ntheta = cap.ntheta;
        for (idx, (g, h)) in grad.iter().zip(&hess).enumerate() {
            let ring = &cap.rings[idx / ntheta];
            let gs = g[0] * g[0] + g[1] * g[1] * ring.sigma_inv_tt;
            let io = iota_node(ring.det_sigma, *g, *h);
            let det = io.det();
            let em = io.eigmin();
            if gs > max_grad_sq {
                max_grad_sq = gs;
                worst_spacelike_node = idx;
            }
            if em < eigmin_iota {
                eigmin_iota = em;
                worst_convex_node = idx;
            }
            let qv = if gs < 1.0 && det > 0.0 {
                q_node(n, gs, det, ring.det_sigma)
            } else {
                f64::NAN
            };
            min_q = min_q.min(qv);
            max_q = max_q.max(qv);
            min_det = min_det.min(det);
            max_det = max_det.max(det);
            grad_sq.push(gs);
            iota.push(io);
            det_iota.push(det);
            q.push(qv);
        }
        Self {
            cap,
            n,
            grad,
            hess,
            grad_sq,
            iota,
            det_iota,
            q,
            max_grad_sq,
            worst_spacelike_node,
            eigmin_iota,
            worst_convex_node,
            min_q,
            max_q,
            min_det_iota: min_det,
            max_det_iota: max_det,
        }
    }

    /// Evaluate and require admissibility (spacelike + strictly convex).
    pub fn evaluate(phi: &ScalarField, scheme: &DiffScheme) -> Result<Self> {
        let bundle = Self::evaluate_raw(phi, scheme);
        bundle.admissible()?;
        Ok(bundle)
    }

    pub fn admissible(&self) -> Result<()> {
        if !(self.max_grad_sq < 1.0) {
            return Err(Error::NotSpacelike {
                node: self.worst_spacelike_node,
                grad_sq: self.max_grad_sq,
            });
        }
        if !(self.eigmin_iota > 0.0) {
            return Err(Error::NonConvex {
                node: self.worst_convex_node,
                eigmin: self.eigmin_iota,
            });
        }
        Ok(())
    }

    /// Largest eigenvalue, over nodes, of the σ-weighted linearization
    /// Q^i_k = Q^ij σ_jk = (−Q/n)·(ι⁻¹σ)^i_k; this is the CFL scale of the
    /// parabolic operator in the chart.
    pub fn parabolicity_lambda_max(&self) -> f64 {
        let n = self.n as f64;
        let ntheta = self.cap.ntheta;
        let mut lam: f64 = 0.0;
        for (idx, io) in self.iota.iter().enumerate() {
            let ring = &self.cap.rings[idx / ntheta];
            // det(σ − λι) = 0: λ² det ι − λ(ι_θθ + σ_θθ ι_rr) + det σ = 0.
            let a = self.det_iota[idx];
            let b = io.a22 + ring.det_sigma * io.a11;
            let c = ring.det_sigma;
            let disc = (b * b - 4.0 * a * c).max(0.0);
            let lmax = (b + disc.sqrt()) / (2.0 * a);
            lam = lam.max((-self.q[idx] / n) * lmax);
        }
        lam
    }
}

/// Tilt factor v = √(1 − |Dφ|²) ∈ (0, 1].
pub fn tilt_v(phi: &ScalarField) -> Result<ScalarField> {
    let bundle = GeometryBundle::evaluate_raw(phi, &DiffScheme::uniform(&phi.cap));
    if !(bundle.max_grad_sq < 1.0) {
        return Err(Error::NotSpacelike {
            node: bundle.worst_spacelike_node,
            grad_sq: bundle.max_grad_sq,
        });
    }
    Ok(ScalarField {
        cap: phi.cap.clone(),
        values: bundle.grad_sq.iter().map(|&g| (1.0 - g).sqrt()).collect(),
    })
}

/// ι = D²φ + σ − Dφ⊗Dφ.
pub fn iota_matrix(phi: &ScalarField) -> SymMatrixField {
    let bundle = GeometryBundle::evaluate_raw(phi, &DiffScheme::uniform(&phi.cap));
    SymMatrixField { mats: bundle.iota }
}

/// Induced metric g_ij = u²σ_ij − u_i u_j and its closed-form inverse
/// g^ij = u⁻²(σ^ij + u^i u^j/(u²v²)).
pub fn induced_metric(u: &ScalarField) -> Result<(SymMatrixField, SymMatrixField)> {
    let derivs = Derivs::of(u, &DiffScheme::uniform(&u.cap));
    induced_metric_with(&u.cap, &u.values, &derivs)
}

pub fn induced_metric_with(
    cap: &HyperbolicCap,
    u: &[f64],
    derivs: &Derivs,
) -> Result<(SymMatrixField, SymMatrixField)> {
    let mut g = Vec::with_capacity(u.len());
    let mut g_inv = Vec::with_capacity(u.len());
    for idx in 0..u.len() {
        let ring = &cap.rings[cap.ring_of(idx)];
        let ui = u[idx];
        let du = derivs.grad[idx];
        let stt = ring.det_sigma;
        g.push(SymMat2::new(
            ui * ui - du[0] * du[0],
            -du[0] * du[1],
            ui * ui * stt - du[1] * du[1],
        ));
        // u^i = σ^ij u_j; v² = 1 − u⁻²|Du|².
        let u_up = [du[0], du[1] * ring.sigma_inv_tt];
        let du_sq = du[0] * u_up[0] + du[1] * u_up[1];
        let v_sq = 1.0 - du_sq / (ui * ui);
        if !(v_sq > 0.0) {
            return Err(Error::NotSpacelike {
                node: idx,
                grad_sq: du_sq / (ui * ui),
            });
        }
        let scale = 1.0 / (ui * ui);
        let aug = scale / (ui * ui * v_sq);
        g_inv.push(SymMat2::new(
            scale + aug * u_up[0] * u_up[0],
            aug * u_up[0] * u_up[1],
            scale * ring.sigma_inv_tt + aug * u_up[1] * u_up[1],
        ));
    }
    Ok((SymMatrixField { mats: g }, SymMatrixField { mats: g_inv }))
}

/// Second fundamental form h_ij = (1/v)(u_{;ij} + uσ_ij − (2/u)u_i u_j).
pub fn second_fundamental(u: &ScalarField) -> Result<SymMatrixField> {
    let derivs = Derivs::of(u, &DiffScheme::uniform(&u.cap));
    second_fundamental_with(&u.cap, &u.values, &derivs)
}

pub fn second_fundamental_with(
    cap: &HyperbolicCap,
    u: &[f64],
    derivs: &Derivs,
) -> Result<SymMatrixField> {
    let mut mats = Vec::with_capacity(u.len());
    for idx in 0..u.len() {
        let ring = &cap.rings[cap.ring_of(idx)];
        let ui = u[idx];
        let du = derivs.grad[idx];
        let hu = derivs.hess[idx];
        let du_sq = du[0] * du[0] + du[1] * du[1] * ring.sigma_inv_tt;
        let v_sq = 1.0 - du_sq / (ui * ui);
        if !(v_sq > 0.0) {
            return Err(Error::NotSpacelike {
                node: idx,
                grad_sq: du_sq / (ui * ui),
            });
        }
        let inv_v = 1.0 / v_sq.sqrt();
        let two_over_u = 2.0 / ui;
        mats.push(SymMat2::new(
            inv_v * (hu.a11 + ui - two_over_u * du[0] * du[0]),
            inv_v * (hu.a12 - two_over_u * du[0] * du[1]),
            inv_v * (hu.a22 + ui * ring.det_sigma - two_over_u * du[1] * du[1]),
        ));
    }
    Ok(SymMatrixField { mats })
}

/// Gauss curvature from the u-form, K = det h / det g.
pub fn gauss_curvature_u(u: &ScalarField) -> Result<ScalarField> {
    let derivs = Derivs::of(u, &DiffScheme::uniform(&u.cap));
    gauss_curvature_u_with(&u.cap, &u.values, &derivs).map(|values| ScalarField {
        cap: u.cap.clone(),
        values,
    })
}

pub fn gauss_curvature_u_with(
    cap: &HyperbolicCap,
    u: &[f64],
    derivs: &Derivs,
) -> Result<Vec<f64>> {
    let h = second_fundamental_with(cap, u, derivs)?;
    let (g, _) = induced_metric_with(cap, u, derivs)?;
    let mut values = Vec::with_capacity(u.len());
    for idx in 0..u.len() {
        let det_g = g.mats[idx].det();
        if det_g == 0.0 {
            return Err(Error::Singular {
                node: idx,
                det: det_g,
            });
        }
        values.push(h.mats[idx].det() / det_g);
    }
    Ok(values)
}

/// Gauss curvature from the φ-form.
pub fn gauss_curvature_phi(phi: &ScalarField) -> Result<ScalarField> {
    let bundle = GeometryBundle::evaluate_raw(phi, &DiffScheme::uniform(&phi.cap));
    if !(bundle.max_grad_sq < 1.0) {
        return Err(Error::NotSpacelike {
            node: bundle.worst_spacelike_node,
            grad_sq: bundle.max_grad_sq,
        });
    }
    Ok(ScalarField {
        cap: phi.cap.clone(),
        values: gauss_curvature_phi_of_bundle(&bundle, &phi.values),
    })
}

pub fn gauss_curvature_phi_of_bundle(bundle: &GeometryBundle, phi: &[f64]) -> Vec<f64> {
    let cap = &bundle.cap;
    phi.iter()
        .enumerate()
        .map(|(idx, &p)| {
            let ring = &cap.rings[cap.ring_of(idx)];
            k_phi_node(bundle.n, p, bundle.grad_sq[idx], bundle.det_iota[idx], ring.det_sigma)
        })
        .collect()
}

/// Flow speed Q(Dφ, D²φ); strictly negative on admissible states.
pub fn rhs_q(phi: &ScalarField) -> Result<ScalarField> {
    let bundle = GeometryBundle::evaluate(phi, &DiffScheme::uniform(&phi.cap))?;
    Ok(ScalarField {
        cap: phi.cap.clone(),
        values: bundle.q,
    })
}

/// Linearization of Q: Q^ij = −(1/n)φ_t ι^ij (positive definite on admissible
/// states) and the first-order coefficient
/// Q^k = −(2φ_t/n)((n+1)/(1−|Dφ|²)σ^{kl} − ι^{kl})φ_l (diagnostic only).
pub fn linearization(
    phi: &ScalarField,
    phi_t: Option<&ScalarField>,
) -> Result<(SymMatrixField, CovectorField)> {
    let bundle = GeometryBundle::evaluate(phi, &DiffScheme::uniform(&phi.cap))?;
    linearization_of_bundle(&bundle, phi_t.map(|f| f.values.as_slice()))
}

pub fn linearization_of_bundle(
    bundle: &GeometryBundle,
    phi_t: Option<&[f64]>,
) -> Result<(SymMatrixField, CovectorField)> {
    let cap = &bundle.cap;
    let n = bundle.n as f64;
    let count = bundle.q.len();
    let mut qij = Vec::with_capacity(count);
    let mut qk = Vec::with_capacity(count);
    for idx in 0..count {
        let ring = &cap.rings[cap.ring_of(idx)];
        let phi_t_v = phi_t.map_or(bundle.q[idx], |p| p[idx]);
        let det = bundle.det_iota[idx];
        if !(det > 0.0) {
            return Err(Error::NonConvex {
                node: idx,
                eigmin: bundle.iota[idx].eigmin(),
            });
        }
        let io = bundle.iota[idx];
        let inv = SymMat2::new(io.a22 / det, -io.a12 / det, io.a11 / det);
        qij.push(inv.scale(-phi_t_v / n));
        let g = bundle.grad[idx];
        let one_minus = 1.0 - bundle.grad_sq[idx];
        let coeff = -2.0 * phi_t_v / n;
        let sigma_term = [(n + 1.0) / one_minus * g[0], (n + 1.0) / one_minus * ring.sigma_inv_tt * g[1]];
        let iota_term = [inv.a11 * g[0] + inv.a12 * g[1], inv.a12 * g[0] + inv.a22 * g[1]];
        qk.push([
            coeff * (sigma_term[0] - iota_term[0]),
            coeff * (sigma_term[1] - iota_term[1]),
        ]);
    }
    Ok((SymMatrixField { mats: qij }, CovectorField { comps: qk }))
}
