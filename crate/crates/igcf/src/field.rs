//! Grid fields on the cap and ghost-ring extension.

use crate::cap::HyperbolicCap;
use crate::ops::SymMat2;
use std::sync::Arc;

/// Real-valued grid function, θ-periodic by construction.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub cap: Arc<HyperbolicCap>,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn constant(cap: Arc<HyperbolicCap>, value: f64) -> Self {
        let n = cap.node_count();
        Self {
            cap,
            values: vec![value; n],
        }
    }

    pub fn from_fn(cap: Arc<HyperbolicCap>, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(cap.node_count());
        for j in 0..cap.nr {
            let r = cap.r_of_ring(j);
            for k in 0..cap.ntheta {
                values.push(f(r, cap.theta_of(k)));
            }
        }
        Self { cap, values }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// max − min over the grid.
    pub fn oscillation(&self) -> f64 {
        self.max() - self.min()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Shift every angular index by `m` grid steps (θ → θ + mΔθ).
    pub fn theta_shifted(&self, m: usize) -> Self {
        let nt = self.cap.ntheta;
        let mut values = vec![0.0; self.values.len()];
        for j in 0..self.cap.nr {
            for k in 0..nt {
                values[j * nt + (k + m) % nt] = self.values[j * nt + k];
            }
        }
        Self {
            cap: self.cap.clone(),
            values,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            cap: self.cap.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Per-node covector components (index 0 = r, 1 = θ).
#[derive(Debug, Clone)]
pub struct CovectorField {
    pub comps: Vec<[f64; 2]>,
}

/// Per-node symmetric 2×2 matrices; symmetry is exact by storage.
#[derive(Debug, Clone)]
pub struct SymMatrixField {
    pub mats: Vec<SymMat2>,
}

/// Field values extended by one ghost ring on each radial side.
///
/// Row layout: row 0 is the pole ghost, rows 1..=Nr are the real rings,
/// row Nr+1 is the outer ghost. The pole ghost mirrors the innermost ring to
/// its antipode, f(−r₀, θ) = f(r₀, θ+π), exact for smooth fields. The outer
/// ghost mirrors the boundary ring across r_max so the centered radial
/// derivative at the boundary face vanishes (the zero-Neumann condition).
#[derive(Debug, Clone)]
pub struct ExtendedField {
    pub nr: usize,
    pub ntheta: usize,
    pub values: Vec<f64>,
}

impl ExtendedField {
    /// Value at ring j (−1 = pole ghost, Nr = outer ghost) and wrapped k.
    #[inline]
    pub fn at(&self, j: isize, k: isize) -> f64 {
        let nt = self.ntheta as isize;
        let k = k.rem_euclid(nt) as usize;
        let row = (j + 1) as usize;
        self.values[row * self.ntheta + k]
    }

    #[inline]
    pub fn row(&self, j: isize) -> &[f64] {
        let row = (j + 1) as usize;
        &self.values[row * self.ntheta..(row + 1) * self.ntheta]
    }
}

/// Extend a field with the Neumann outer ghost and the antipodal pole ghost.
pub fn apply_neumann_ghost(f: &ScalarField) -> ExtendedField {
    extend_with(
        &f.cap,
        &f.values,
        |k, _| f.values[k],
        |k, base| f.values[base + k],
    )
}

/// Generic extension: `pole(k, Nθ/2)` produces the pole ghost at angular
/// index k (already antipodally shifted offset provided), `outer(k, base)`
/// the outer ghost (base = start of the boundary ring).
pub(crate) fn extend_with(
    cap: &HyperbolicCap,
    values: &[f64],
    pole: impl Fn(usize, usize) -> f64,
    outer: impl Fn(usize, usize) -> f64,
) -> ExtendedField {
    let nt = cap.ntheta;
    let nr = cap.nr;
    let half = nt / 2;
    let mut out = Vec::with_capacity((nr + 2) * nt);
    for k in 0..nt {
        out.push(pole((k + half) % nt, half));
    }
    out.extend_from_slice(values);
    let base = (nr - 1) * nt;
    for k in 0..nt {
        out.push(outer(k, base));
    }
    ExtendedField {
        nr,
        ntheta: nt,
        values: out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cap::build_cap;

    fn cap() -> Arc<HyperbolicCap> {
        Arc::new(build_cap(2, 1.0, 8, 16).unwrap())
    }

    #[test]
    fn neumann_ghost_mirrors_boundary_ring() {
        let cap = cap();
        let f = ScalarField::from_fn(cap.clone(), |r, t| r * t.cos());
        let ext = apply_neumann_ghost(&f);
        for k in 0..cap.ntheta as isize {
            assert_eq!(ext.at(cap.nr as isize, k), ext.at(cap.nr as isize - 1, k));
        }
    }

    #[test]
    fn pole_ghost_is_antipodal() {
        let cap = cap();
        let f = ScalarField::from_fn(cap.clone(), |r, t| r.sinh() * t.cos());
        let ext = apply_neumann_ghost(&f);
        let half = cap.ntheta as isize / 2;
        for k in 0..cap.ntheta as isize {
            assert_eq!(ext.at(-1, k), ext.at(0, k + half));
        }
    }

    #[test]
    fn theta_wraps_periodically() {
        let cap = cap();
        let f = ScalarField::from_fn(cap.clone(), |_, t| t.sin());
        let ext = apply_neumann_ghost(&f);
        assert_eq!(ext.at(2, -1), ext.at(2, cap.ntheta as isize - 1));
        assert_eq!(ext.at(2, cap.ntheta as isize), ext.at(2, 0));
    }

    #[test]
    fn oscillation_and_extrema() {
        let cap = cap();
        let f = ScalarField::from_fn(cap, |_, t| t.cos());
        assert!(f.oscillation() > 1.9 && f.oscillation() <= 2.0);
        assert!(f.min() >= -1.0 && f.max() <= 1.0);
    }
}
