//! Discrete convex geodesic cap of the hyperbolic plane ℋ²(1).
//!
//! The cap is charted by geodesic polar coordinates (r, θ) with base metric
//! σ = dr² + sinh²r dθ². Radial nodes are staggered, r_j = (j + 1/2)Δr, so no
//! node sits on the coordinate pole; the angular direction is periodic.

use crate::error::{Error, Result};
use crate::ops::SymMat2;

/// Per-ring closed-form chart data.
#[derive(Debug, Clone, Copy)]
pub struct RingData {
    pub r: f64,
    pub sinh_r: f64,
    pub cosh_r: f64,
    /// det σ = sinh²r (n = 2).
    pub det_sigma: f64,
    /// σ^θθ = 1/sinh²r.
    pub sigma_inv_tt: f64,
    /// Γ^θ_{rθ} = coth r.
    pub coth_r: f64,
    /// Γ^r_{θθ} = −sinh r cosh r.
    pub gamma_r_tt: f64,
}

/// Christoffel symbols of σ at a node, in the polar chart. Only the two
/// nonzero families survive; Γ is symmetric in its lower indices.
#[derive(Debug, Clone, Copy)]
pub struct Christoffel {
    /// Γ^θ_{rθ} = Γ^θ_{θr} = coth r.
    pub theta_r_theta: f64,
    /// Γ^r_{θθ} = −sinh r cosh r.
    pub r_theta_theta: f64,
}

impl Christoffel {
    /// Full component array Γ^k_{ij}, indices 0 = r, 1 = θ.
    pub fn full(&self) -> [[[f64; 2]; 2]; 2] {
        let mut g = [[[0.0; 2]; 2]; 2];
        g[1][0][1] = self.theta_r_theta;
        g[1][1][0] = self.theta_r_theta;
        g[0][1][1] = self.r_theta_theta;
        g
    }
}

/// Discretized geodesic cap Mⁿ ⊂ ℋⁿ(1), n = 2.
#[derive(Debug, Clone)]
pub struct HyperbolicCap {
    pub n: u32,
    pub r_max: f64,
    pub nr: usize,
    pub ntheta: usize,
    pub dr: f64,
    pub dtheta: f64,
    pub rings: Vec<RingData>,
}

/// Closed-form σ_θθ at radius r.
pub fn sigma_tt_at_radius(r: f64) -> f64 {
    r.sinh() * r.sinh()
}

/// Closed-form det σ at radius r (n = 2 polar chart).
pub fn det_sigma_at_radius(r: f64) -> f64 {
    sigma_tt_at_radius(r)
}

impl HyperbolicCap {
    pub fn node_count(&self) -> usize {
        self.nr * self.ntheta
    }

    #[inline]
    pub fn index(&self, j: usize, k: usize) -> usize {
        j * self.ntheta + k
    }

    #[inline]
    pub fn ring_of(&self, index: usize) -> usize {
        index / self.ntheta
    }

    pub fn r_of_ring(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dr
    }

    pub fn theta_of(&self, k: usize) -> f64 {
        k as f64 * self.dtheta
    }

    /// σ_ij, σ^ij and det σ at a node.
    pub fn metric_at(&self, index: usize) -> Result<(SymMat2, SymMat2, f64)> {
        let ring = self.ring_checked(index)?;
        let sigma = SymMat2::new(1.0, 0.0, ring.det_sigma);
        let sigma_inv = SymMat2::new(1.0, 0.0, ring.sigma_inv_tt);
        Ok((sigma, sigma_inv, ring.det_sigma))
    }

    /// Γ^k_ij of σ at a node.
    pub fn christoffel_at(&self, index: usize) -> Result<Christoffel> {
        let ring = self.ring_checked(index)?;
        Ok(Christoffel {
            theta_r_theta: ring.coth_r,
            r_theta_theta: ring.gamma_r_tt,
        })
    }

    /// True on the outermost radial ring (the discrete ∂M).
    pub fn is_boundary(&self, index: usize) -> bool {
        self.ring_of(index) == self.nr - 1
    }

    /// Outward unit conormal μ at the boundary: the ∂_r direction, which is
    /// already unit since σ_rr = 1.
    pub fn mu(&self) -> [f64; 2] {
        [1.0, 0.0]
    }

    /// Geodesic curvature of ∂M as a circle of radius r_max: coth(r_max).
    /// The boundary second fundamental form is this multiple of the induced
    /// metric, so the cap is convex by construction.
    pub fn boundary_convexity(&self) -> f64 {
        1.0 / self.r_max.tanh()
    }

    fn ring_checked(&self, index: usize) -> Result<&RingData> {
        if index >= self.node_count() {
            return Err(Error::OutOfRange {
                index,
                len: self.node_count(),
            });
        }
        Ok(&self.rings[self.ring_of(index)])
    }
}

/// Build the discrete cap. Nθ must be even: the pole ghost ring mirrors each
/// node to its antipode (k + Nθ/2), which only lands on the grid for even Nθ.
pub fn build_cap(n: u32, r_max: f64, nr: usize, ntheta: usize) -> Result<HyperbolicCap> {
    if !(r_max > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "r_max must be > 0, got {r_max}"
        )));
    }
    if nr < 4 {
        return Err(Error::InvalidParameter(format!("Nr must be >= 4, got {nr}")));
    }
    if ntheta < 8 {
        return Err(Error::InvalidParameter(format!(
            "Ntheta must be >= 8, got {ntheta}"
        )));
    }
    if ntheta % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "Ntheta must be even (antipodal pole ghost), got {ntheta}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be >= 2, got {n}")));
    }
    let dr = r_max / nr as f64;
    let dtheta = std::f64::consts::TAU / ntheta as f64;
    let rings = (0..nr)
        .map(|j| {
            let r = (j as f64 + 0.5) * dr;
            let sinh_r = r.sinh();
            let cosh_r = r.cosh();
            RingData {
                r,
                sinh_r,
                cosh_r,
                det_sigma: sinh_r * sinh_r,
                sigma_inv_tt: 1.0 / (sinh_r * sinh_r),
                coth_r: cosh_r / sinh_r,
                gamma_r_tt: -sinh_r * cosh_r,
            }
        })
        .collect();
    Ok(HyperbolicCap {
        n,
        r_max,
        nr,
        ntheta,
        dr,
        dtheta,
        rings,
    })
}

/// How the r-derivatives of Γ are obtained in the curvature self-check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaDerivatives {
    /// Closed-form d/dr of coth r and −sinh r cosh r.
    Analytic,
    /// Centered differences of the closed-form Γ with spacing Δr.
    FiniteDifference,
}

/// Max deviation of the curvature tensor of σ from the constant-curvature
/// identity R_{ijml} = σ_{il}σ_{jm} − σ_{im}σ_{jl}, over all nodes and index
/// combinations. Sign convention: R(X,Y)Z = −∇_X∇_Y Z + ∇_Y∇_X Z + ∇_{[X,Y]}Z,
/// i.e. R^p_{ijm} = −∂_i Γ^p_{jm} + ∂_j Γ^p_{im} − Γ^p_{ik}Γ^k_{jm} + Γ^p_{jk}Γ^k_{im}.
pub fn verify_constant_curvature(cap: &HyperbolicCap, mode: GammaDerivatives) -> f64 {
    let mut worst: f64 = 0.0;
    for ring in &cap.rings {
        let r = ring.r;
        // Centered differences of coth do not converge across its pole, so
        // the FD check is meaningful only a fixed fraction into the cap.
        if matches!(mode, GammaDerivatives::FiniteDifference) && r < 0.25 * cap.r_max {
            continue;
        }
        let gamma = Christoffel {
            theta_r_theta: ring.coth_r,
            r_theta_theta: ring.gamma_r_tt,
        }
        .full();
        // dgamma[i][p][j][m] = ∂_i Γ^p_{jm}; θ-derivatives vanish in this chart.
        let (d_coth, d_gtt) = match mode {
            GammaDerivatives::Analytic => {
                let s = r.sinh();
                (-1.0 / (s * s), -(r.cosh() * r.cosh() + s * s))
            }
            GammaDerivatives::FiniteDifference => {
                let h = cap.dr;
                let coth = |x: f64| x.cosh() / x.sinh();
                let gtt = |x: f64| -x.sinh() * x.cosh();
                (
                    (coth(r + h) - coth(r - h)) / (2.0 * h),
                    (gtt(r + h) - gtt(r - h)) / (2.0 * h),
                )
            }
        };
        let mut dgamma = [[[[0.0f64; 2]; 2]; 2]; 2];
        dgamma[0][1][0][1] = d_coth;
        dgamma[0][1][1][0] = d_coth;
        dgamma[0][0][1][1] = d_gtt;

        let sigma = [[1.0, 0.0], [0.0, ring.det_sigma]];
        for i in 0..2 {
            for j in 0..2 {
                for m in 0..2 {
                    for l in 0..2 {
                        let mut rp = [0.0f64; 2];
                        for (p, rp_p) in rp.iter_mut().enumerate() {
                            let mut val = -dgamma[i][p][j][m] + dgamma[j][p][i][m];
                            for k in 0..2 {
                                val += -gamma[p][i][k] * gamma[k][j][m]
                                    + gamma[p][j][k] * gamma[k][i][m];
                            }
                            *rp_p = val;
                        }
                        let r_ijml = sigma[l][0] * rp[0] + sigma[l][1] * rp[1];
                        let target = sigma[i][l] * sigma[j][m] - sigma[i][m] * sigma[j][l];
                        worst = worst.max((r_ijml - target).abs());
                    }
                }
            }
        }
    }
    worst
}
