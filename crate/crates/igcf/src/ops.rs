//! Covariant finite-difference calculus on the cap and small symmetric-matrix
//! algebra.
//!
//! All stencils are centered and second order. Derivative indices are chart
//! indices (r, θ); covariance enters only through the Christoffel correction
//! f_{;ij} = ∂_i∂_j f − Γ^k_{ij} f_k.

use crate::cap::HyperbolicCap;
use crate::error::{Error, Result};
use crate::field::{apply_neumann_ghost, CovectorField, ExtendedField, ScalarField, SymMatrixField};

/// Symmetric 2×2 matrix, upper triangle stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl SymMat2 {
    pub const ZERO: SymMat2 = SymMat2 {
        a11: 0.0,
        a12: 0.0,
        a22: 0.0,
    };

    pub fn new(a11: f64, a12: f64, a22: f64) -> Self {
        Self { a11, a12, a22 }
    }

    pub fn diag(a11: f64, a22: f64) -> Self {
        Self::new(a11, 0.0, a22)
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    pub fn inverse(&self) -> Result<SymMat2> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Singular { node: 0, det });
        }
        Ok(SymMat2::new(self.a22 / det, -self.a12 / det, self.a11 / det))
    }

    /// Smallest eigenvalue, closed form.
    #[inline]
    pub fn eigmin(&self) -> f64 {
        let mean = 0.5 * (self.a11 + self.a22);
        let half_diff = 0.5 * (self.a11 - self.a22);
        mean - (half_diff * half_diff + self.a12 * self.a12).sqrt()
    }

    pub fn eigmax(&self) -> f64 {
        let mean = 0.5 * (self.a11 + self.a22);
        let half_diff = 0.5 * (self.a11 - self.a22);
        mean + (half_diff * half_diff + self.a12 * self.a12).sqrt()
    }

    pub fn scale(&self, s: f64) -> SymMat2 {
        SymMat2::new(self.a11 * s, self.a12 * s, self.a22 * s)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.a11,
            (1, 1) => self.a22,
            _ => self.a12,
        }
    }
}

/// det, inverse and eigmin of a symmetric 2×2 matrix in one call.
pub fn sym2_algebra(m: SymMat2) -> Result<(f64, SymMat2, f64)> {
    Ok((m.det(), m.inverse()?, m.eigmin()))
}

/// LDLᵀ factorization of a dense symmetric matrix (row-major, size·size).
/// Returns the determinant; used as an n×n cross-check of the closed 2×2 path.
pub fn ldlt_det(a: &[f64], size: usize) -> Result<f64> {
    let mut l = vec![0.0; size * size];
    let mut d = vec![0.0; size];
    for j in 0..size {
        let mut dj = a[j * size + j];
        for k in 0..j {
            dj -= l[j * size + k] * l[j * size + k] * d[k];
        }
        if dj == 0.0 {
            return Err(Error::Singular { node: j, det: 0.0 });
        }
        d[j] = dj;
        l[j * size + j] = 1.0;
        for i in (j + 1)..size {
            let mut v = a[i * size + j];
            for k in 0..j {
                v -= l[i * size + k] * l[j * size + k] * d[k];
            }
            l[i * size + j] = v / dj;
        }
    }
    Ok(d.iter().product())
}

/// Stencil configuration: per-ring angular stride.
///
/// Closed-form derivatives in the polar chart carry a 1/sinh²r weight on the
/// θθ term, so an explicit stepper is throttled by the arc spacing of the
/// innermost ring. The pole-safe scheme widens the θ stencil ring by ring so
/// the effective arc length s·Δθ·sinh r matches Δr; the arm shrinks with the
/// grid, keeping the scheme second order at any fixed radius.
#[derive(Debug, Clone)]
pub struct DiffScheme {
    pub strides: Vec<usize>,
    /// min(Δr, min_j s_j Δθ sinh r_j): the effective smallest spacing.
    pub h_eff: f64,
}

impl DiffScheme {
    /// Stride 1 everywhere: maximal accuracy, used by oracles and monitors.
    pub fn uniform(cap: &HyperbolicCap) -> Self {
        let h_eff = cap
            .rings
            .iter()
            .map(|ring| ring.sinh_r * cap.dtheta)
            .fold(cap.dr, f64::min);
        Self {
            strides: vec![1; cap.nr],
            h_eff,
        }
    }

    /// Ring-dependent strides sized for explicit stepping.
    pub fn pole_safe(cap: &HyperbolicCap) -> Self {
        let max_stride = (cap.ntheta / 4).max(1);
        let strides: Vec<usize> = cap
            .rings
            .iter()
            .map(|ring| {
                let s = (cap.dr / (cap.dtheta * ring.sinh_r)).ceil() as usize;
                s.clamp(1, max_stride)
            })
            .collect();
        let h_eff = cap
            .rings
            .iter()
            .zip(&strides)
            .map(|(ring, &s)| s as f64 * cap.dtheta * ring.sinh_r)
            .fold(cap.dr, f64::min);
        Self { strides, h_eff }
    }
}

/// Raw chart derivatives of an extended field at node (j, k) with stride s.
#[inline]
pub(crate) fn raw_derivs(
    ext: &ExtendedField,
    cap: &HyperbolicCap,
    j: usize,
    k: usize,
    s: usize,
) -> (f64, f64, f64, f64, f64) {
    let ji = j as isize;
    let ki = k as isize;
    let si = s as isize;
    let dr = cap.dr;
    let dth = s as f64 * cap.dtheta;
    let c = ext.at(ji, ki);
    let rp = ext.at(ji + 1, ki);
    let rm = ext.at(ji - 1, ki);
    let tp = ext.at(ji, ki + si);
    let tm = ext.at(ji, ki - si);
    let f_r = (rp - rm) / (2.0 * dr);
    let f_t = (tp - tm) / (2.0 * dth);
    let f_rr = (rp - 2.0 * c + rm) / (dr * dr);
    let f_tt = (tp - 2.0 * c + tm) / (dth * dth);
    let f_rt = (ext.at(ji + 1, ki + si) - ext.at(ji + 1, ki - si) - ext.at(ji - 1, ki + si)
        + ext.at(ji - 1, ki - si))
        / (4.0 * dr * dth);
    (f_r, f_t, f_rr, f_rt, f_tt)
}

/// Covariant gradient (f_r, f_θ), centered O(h²) stencils with Neumann and
/// antipodal ghosts.
pub fn cov_gradient_with(f: &ScalarField, scheme: &DiffScheme) -> CovectorField {
    let cap = &f.cap;
    let ext = apply_neumann_ghost(f);
    let mut comps = Vec::with_capacity(f.values.len());
    for j in 0..cap.nr {
        let s = scheme.strides[j];
        for k in 0..cap.ntheta {
            let (f_r, f_t, _, _, _) = raw_derivs(&ext, cap, j, k, s);
            comps.push([f_r, f_t]);
        }
    }
    CovectorField { comps }
}

pub fn cov_gradient(f: &ScalarField) -> CovectorField {
    cov_gradient_with(f, &DiffScheme::uniform(&f.cap))
}

/// Covariant Hessian f_{;ij} = ∂_i∂_j f − Γ^k_{ij} f_k, symmetric by storage.
pub fn cov_hessian_with(f: &ScalarField, scheme: &DiffScheme) -> SymMatrixField {
    let cap = &f.cap;
    let ext = apply_neumann_ghost(f);
    let mut mats = Vec::with_capacity(f.values.len());
    for j in 0..cap.nr {
        let ring = &cap.rings[j];
        let s = scheme.strides[j];
        for k in 0..cap.ntheta {
            let (f_r, f_t, f_rr, f_rt, f_tt) = raw_derivs(&ext, cap, j, k, s);
            mats.push(SymMat2::new(
                f_rr,
                f_rt - ring.coth_r * f_t,
                f_tt + ring.sinh_r * ring.cosh_r * f_r,
            ));
        }
    }
    SymMatrixField { mats }
}

pub fn cov_hessian(f: &ScalarField) -> SymMatrixField {
    cov_hessian_with(f, &DiffScheme::uniform(&f.cap))
}

/// |Df|² = σ^ij f_i f_j per node.
pub fn grad_norm_sq_with(f: &ScalarField, scheme: &DiffScheme) -> ScalarField {
    let cap = f.cap.clone();
    let grad = cov_gradient_with(f, scheme);
    let mut values = Vec::with_capacity(f.values.len());
    for (idx, g) in grad.comps.iter().enumerate() {
        let ring = &cap.rings[cap.ring_of(idx)];
        values.push(g[0] * g[0] + g[1] * g[1] * ring.sigma_inv_tt);
    }
    ScalarField { cap, values }
}

pub fn grad_norm_sq(f: &ScalarField) -> ScalarField {
    grad_norm_sq_with(f, &DiffScheme::uniform(&f.cap))
}
