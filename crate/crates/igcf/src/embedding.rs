//! Independent geometric oracle through the ambient embedding.
//!
//! The graph is realized as X(r, θ) = u(r, θ)·x(r, θ) ⊂ ℝ³₁ with
//! x = (sinh r cos θ, sinh r sin θ, cosh r) the unit hyperboloid chart,
//! ⟨a, b⟩ = a₀b₀ + a₁b₁ − a₂b₂. Metric, normal, second fundamental form and
//! Gauss curvature are recomputed from X alone, so agreement with the
//! formula-based route is a genuine cross-check, not a tautology.

use crate::cap::HyperbolicCap;
use crate::error::{Error, Result};
use crate::field::{extend_with, ExtendedField, ScalarField, SymMatrixField};
use crate::geometry::Derivs;
use crate::ops::{raw_derivs, DiffScheme, SymMat2};
use std::sync::Arc;

#[inline]
fn lorentz(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] - a[2] * b[2]
}

/// Unit hyperboloid position x(r, θ).
#[inline]
pub fn hyperboloid_point(r: f64, theta: f64) -> [f64; 3] {
    let (s, c) = theta.sin_cos();
    [r.sinh() * c, r.sinh() * s, r.cosh()]
}

#[inline]
fn hyperboloid_frame(r: f64, theta: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
    let (s, c) = theta.sin_cos();
    let (sh, ch) = (r.sinh(), r.cosh());
    (
        [sh * c, sh * s, ch],
        [ch * c, ch * s, sh],
        [-sh * s, sh * c, 0.0],
    )
}

/// Everything the oracle measures about one embedded state.
#[derive(Debug, Clone)]
pub struct EmbeddingReport {
    pub g: SymMatrixField,
    pub h: SymMatrixField,
    pub k: ScalarField,
    /// Past-directed unit normal per node (time component negative).
    pub nu: Vec<[f64; 3]>,
    /// max |⟨ν, ν⟩ + 1| over nodes.
    pub max_unit_residual: f64,
    /// max |⟨ν, E_i⟩| over nodes and both tangents.
    pub max_tangency_residual: f64,
    /// max-component gap between the constructed normal and the closed form
    /// ν = −(x + u⁻¹σ^{jk}u_k x_j)/v.
    pub max_closed_form_nu_gap: f64,
}

struct NodeGeometry {
    e_r: [f64; 3],
    e_t: [f64; 3],
    xc: [[f64; 3]; 3], // covariant X_{;rr}, X_{;rθ}, X_{;θθ}
}

fn assemble(
    cap: &Arc<HyperbolicCap>,
    u: &[f64],
    du: &[[f64; 2]],
    nodes: impl Iterator<Item = NodeGeometry>,
) -> Result<EmbeddingReport> {
    let count = u.len();
    let mut g = Vec::with_capacity(count);
    let mut h = Vec::with_capacity(count);
    let mut k = Vec::with_capacity(count);
    let mut nu_all = Vec::with_capacity(count);
    let mut unit_res: f64 = 0.0;
    let mut tan_res: f64 = 0.0;
    let mut nu_gap: f64 = 0.0;
    for (idx, node) in nodes.enumerate() {
        let ring = &cap.rings[cap.ring_of(idx)];
        let NodeGeometry { e_r, e_t, xc } = node;
        // Lorentz-orthogonal complement of span{E_r, E_θ} via the Euclidean
        // cross product c = E_r × E_θ and the index flip w = η⁻¹c.
        let c = [
            e_r[1] * e_t[2] - e_r[2] * e_t[1],
            e_r[2] * e_t[0] - e_r[0] * e_t[2],
            e_r[0] * e_t[1] - e_r[1] * e_t[0],
        ];
        let w = [c[0], c[1], -c[2]];
        let norm_sq = -lorentz(w, w);
        let grad_sq = (du[idx][0] * du[idx][0] + du[idx][1] * du[idx][1] * ring.sigma_inv_tt)
            / (u[idx] * u[idx]);
        if !(norm_sq > 0.0) {
            return Err(Error::NotSpacelike { node: idx, grad_sq });
        }
        let inv = 1.0 / norm_sq.sqrt();
        let mut nu = [w[0] * inv, w[1] * inv, w[2] * inv];
        if nu[2] > 0.0 {
            nu = [-nu[0], -nu[1], -nu[2]];
        }

        let g_node = SymMat2::new(lorentz(e_r, e_r), lorentz(e_r, e_t), lorentz(e_t, e_t));
        let det_g = g_node.det();
        if !(det_g > 0.0) {
            return Err(Error::NotSpacelike { node: idx, grad_sq });
        }
        let h_node = SymMat2::new(
            lorentz(xc[0], nu),
            lorentz(xc[1], nu),
            lorentz(xc[2], nu),
        );
        k.push(h_node.det() / det_g);

        unit_res = unit_res.max((lorentz(nu, nu) + 1.0).abs());
        tan_res = tan_res
            .max(lorentz(nu, e_r).abs())
            .max(lorentz(nu, e_t).abs());

        // Closed-form normal from the graph structure.
        let (x0, x_r, x_t) = hyperboloid_frame(ring.r, cap.theta_of(idx % cap.ntheta));
        let v_sq = 1.0 - grad_sq;
        if v_sq > 0.0 {
            let inv_v = 1.0 / v_sq.sqrt();
            let b_r = du[idx][0] / u[idx];
            let b_t = du[idx][1] * ring.sigma_inv_tt / u[idx];
            for a in 0..3 {
                let cf = -inv_v * (x0[a] + b_r * x_r[a] + b_t * x_t[a]);
                nu_gap = nu_gap.max((nu[a] - cf).abs());
            }
        }
        g.push(g_node);
        h.push(h_node);
        nu_all.push(nu);
    }
    Ok(EmbeddingReport {
        g: SymMatrixField { mats: g },
        h: SymMatrixField { mats: h },
        k: ScalarField {
            cap: cap.clone(),
            values: k,
        },
        nu: nu_all,
        max_unit_residual: unit_res,
        max_tangency_residual: tan_res,
        max_closed_form_nu_gap: nu_gap,
    })
}

/// Extended ambient component fields X^a on the ghost-padded grid.
///
/// The pole ghost is exact because each ambient component satisfies
/// X^a(−r, θ) = X^a(r, θ+π); the outer ghost pairs the mirrored u value with
/// the true chart point at r_max + Δr/2.
fn ambient_components(u: &ScalarField) -> [ExtendedField; 3] {
    let cap = &u.cap;
    let mut comps: Vec<ExtendedField> = Vec::with_capacity(3);
    for a in 0..3 {
        let values: Vec<f64> = u
            .values
            .iter()
            .enumerate()
            .map(|(idx, &ui)| {
                let r = cap.r_of_ring(cap.ring_of(idx));
                ui * hyperboloid_point(r, cap.theta_of(idx % cap.ntheta))[a]
            })
            .collect();
        let r_ghost = cap.r_max + 0.5 * cap.dr;
        let ext = extend_with(
            cap,
            &values,
            |k, _| values[k],
            |k, base| u.values[base + k] * hyperboloid_point(r_ghost, cap.theta_of(k))[a],
        );
        comps.push(ext);
    }
    let [a, b, c]: [ExtendedField; 3] = comps.try_into().expect("three components");
    [a, b, c]
}

/// Oracle with all derivatives taken by finite differences on the ambient
/// component fields. Second-order accurate; independent of the formula route.
pub fn embedding_oracle(u: &ScalarField) -> Result<EmbeddingReport> {
    let cap = u.cap.clone();
    let scheme = DiffScheme::uniform(&cap);
    let ext = ambient_components(u);
    let du = Derivs::of(u, &scheme);

    let mut nodes = Vec::with_capacity(u.values.len());
    for j in 0..cap.nr {
        let ring = &cap.rings[j];
        for k in 0..cap.ntheta {
            let mut e_r = [0.0; 3];
            let mut e_t = [0.0; 3];
            let mut xc = [[0.0; 3]; 3];
            for a in 0..3 {
                let (f_r, f_t, f_rr, f_rt, f_tt) = raw_derivs(&ext[a], &cap, j, k, 1);
                e_r[a] = f_r;
                e_t[a] = f_t;
                xc[0][a] = f_rr;
                xc[1][a] = f_rt - ring.coth_r * f_t;
                xc[2][a] = f_tt + ring.sinh_r * ring.cosh_r * f_r;
            }
            nodes.push(NodeGeometry { e_r, e_t, xc });
        }
    }
    assemble(&cap, &u.values, &du.grad, nodes.into_iter())
}

/// Oracle with closed-form chart derivatives of x and caller-supplied
/// derivatives of u; exact up to rounding for analytically known u.
pub fn embedding_oracle_analytic(
    cap: &Arc<HyperbolicCap>,
    u: &[f64],
    du: &Derivs,
) -> Result<EmbeddingReport> {
    let mut nodes = Vec::with_capacity(u.len());
    for (idx, &ui) in u.iter().enumerate() {
        let ring = &cap.rings[cap.ring_of(idx)];
        let theta = cap.theta_of(idx % cap.ntheta);
        let (x, x_r, x_t) = hyperboloid_frame(ring.r, theta);
        let g = du.grad[idx];
        let hs = du.hess[idx];
        let e_r = [
            g[0] * x[0] + ui * x_r[0],
            g[0] * x[1] + ui * x_r[1],
            g[0] * x[2] + ui * x_r[2],
        ];
        let e_t = [
            g[1] * x[0] + ui * x_t[0],
            g[1] * x[1] + ui * x_t[1],
            g[1] * x[2] + ui * x_t[2],
        ];
        // x_{;ij} = σ_ij x on the unit hyperboloid, so
        // X_{;ij} = (u_{;ij} + u σ_ij) x + u_i x_j + u_j x_i.
        let mut xc = [[0.0; 3]; 3];
        let sigma = [1.0, 0.0, ring.det_sigma];
        let coeff = [hs.a11 + ui * sigma[0], hs.a12, hs.a22 + ui * sigma[2]];
        for a in 0..3 {
            xc[0][a] = coeff[0] * x[a] + 2.0 * g[0] * x_r[a];
            xc[1][a] = coeff[1] * x[a] + g[0] * x_t[a] + g[1] * x_r[a];
            xc[2][a] = coeff[2] * x[a] + 2.0 * g[1] * x_t[a];
        }
        nodes.push(NodeGeometry { e_r, e_t, xc });
    }
    assemble(cap, u, &du.grad, nodes.into_iter())
}

/// Worst-node residual of the Gauss formula X_{;ij}(g) + h_ij ν = 0, where
/// the connection of the induced metric g is rebuilt by finite differences of
/// the formula-route g field. Evaluated on interior rings only: the chart
/// components of g are not antipodally even across the pole and the one-sided
/// boundary ring would need its own ghost model.
pub fn gauss_formula_residual(u: &ScalarField) -> Result<f64> {
    let cap = u.cap.clone();
    if cap.nr < 4 {
        return Err(Error::InvalidParameter(
            "gauss residual needs at least 4 rings".into(),
        ));
    }
    let derivs = Derivs::of(u, &DiffScheme::uniform(&cap));
    let (g, g_inv) = crate::geometry::induced_metric_with(&cap, &u.values, &derivs)?;
    let report = embedding_oracle(u)?;
    let ext = ambient_components(u);

    let nt = cap.ntheta;
    // Chart derivatives of the three independent g components by centered
    // differences, interior rings only.
    let g_at = |j: usize, k: usize| g.mats[j * nt + (k % nt)];
    let mut worst: f64 = 0.0;
    for j in 1..cap.nr - 1 {
        for k in 0..nt {
            let idx = j * nt + k;
            let kp = (k + 1) % nt;
            let km = (k + nt - 1) % nt;
            let dgr = [
                (g_at(j + 1, k).a11 - g_at(j - 1, k).a11) / (2.0 * cap.dr),
                (g_at(j + 1, k).a12 - g_at(j - 1, k).a12) / (2.0 * cap.dr),
                (g_at(j + 1, k).a22 - g_at(j - 1, k).a22) / (2.0 * cap.dr),
            ];
            let dgt = [
                (g_at(j, kp).a11 - g_at(j, km).a11) / (2.0 * cap.dtheta),
                (g_at(j, kp).a12 - g_at(j, km).a12) / (2.0 * cap.dtheta),
                (g_at(j, kp).a22 - g_at(j, km).a22) / (2.0 * cap.dtheta),
            ];
            // ∂g packed as d[i][(a,b)] with (a,b) ∈ {rr, rθ, θθ}.
            let d = [dgr, dgt];
            let gi = g_inv.mats[idx];
            // Γ^m_{ab} = ½ g^{ml}(∂_a g_bl + ∂_b g_al − ∂_l g_ab).
            let mut gamma = [[[0.0f64; 2]; 2]; 2];
            let pack = |a: usize, b: usize| a + b; // rr→0, rθ→1, θθ→2
            for m in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let mut s = 0.0;
                        for l in 0..2 {
                            let gml = gi.get(m, l);
                            s += gml
                                * (d[a][pack(b, l)] + d[b][pack(a, l)] - d[l][pack(a, b)]);
                        }
                        gamma[m][a][b] = 0.5 * s;
                    }
                }
            }
            let mut first = [[0.0f64; 3]; 2];
            let mut second = [[[0.0f64; 3]; 2]; 2];
            for a in 0..3 {
                let (f_r, f_t, f_rr, f_rt, f_tt) = raw_derivs(&ext[a], &cap, j, k, 1);
                first[0][a] = f_r;
                first[1][a] = f_t;
                second[0][0][a] = f_rr;
                second[0][1][a] = f_rt;
                second[1][0][a] = f_rt;
                second[1][1][a] = f_tt;
            }
            let nu = report.nu[idx];
            for ai in 0..2 {
                for bi in ai..2 {
                    let h_ab = report.h.mats[idx].get(ai, bi);
                    for c in 0..3 {
                        let cov = second[ai][bi][c]
                            - gamma[0][ai][bi] * first[0][c]
                            - gamma[1][ai][bi] * first[1][c];
                        worst = worst.max((cov + h_ab * nu[c]).abs());
                    }
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cap::build_cap;

    fn cap(nr: usize, nt: usize) -> Arc<HyperbolicCap> {
        Arc::new(build_cap(2, 1.0, nr, nt).unwrap())
    }

    fn zero_derivs(count: usize) -> Derivs {
        Derivs {
            grad: vec![[0.0, 0.0]; count],
            hess: vec![SymMat2::ZERO; count],
        }
    }

    #[test]
    fn analytic_oracle_on_constant_graph() {
        // u ≡ 2: g = 4σ, h = 2σ, K = 1/4, all to rounding.
        let c = cap(16, 32);
        let u = vec![2.0; c.node_count()];
        let report = embedding_oracle_analytic(&c, &u, &zero_derivs(u.len())).unwrap();
        for (idx, m) in report.g.mats.iter().enumerate() {
            let ring = &c.rings[c.ring_of(idx)];
            assert!((m.a11 - 4.0).abs() <= 1e-12);
            assert!(m.a12.abs() <= 1e-12);
            assert!((m.a22 - 4.0 * ring.det_sigma).abs() <= 1e-12 * ring.det_sigma.max(1.0));
            let hm = report.h.mats[idx];
            assert!((hm.a11 - 2.0).abs() <= 1e-12);
            assert!((hm.a22 - 2.0 * ring.det_sigma).abs() <= 1e-12 * ring.det_sigma.max(1.0));
            assert!((report.k.values[idx] - 0.25).abs() <= 1e-12);
        }
        assert!(report.max_unit_residual <= 1e-12);
        assert!(report.max_tangency_residual <= 1e-12);
        assert!(report.max_closed_form_nu_gap <= 1e-12);
    }

    #[test]
    fn normal_is_past_directed_unit_timelike() {
        let c = cap(16, 32);
        let pi = std::f64::consts::PI;
        let u = ScalarField::from_fn(c, move |r, t| {
            (1.0 + 0.05 * (pi * r).cos() + 0.02 * r.sinh().powi(2) * (2.0 * t).cos()).exp()
        });
        let report = embedding_oracle(&u).unwrap();
        assert!(report.nu.iter().all(|n| n[2] < 0.0));
        assert!(report.max_unit_residual <= 1e-12);
        assert!(report.max_tangency_residual <= 1e-10);
    }

    #[test]
    fn fd_oracle_converges_to_formula_route() {
        let pi = std::f64::consts::PI;
        let profile = move |r: f64, t: f64| {
            (0.05 * (pi * r).cos()
                + 0.02 * r.sinh().powi(2) * (1.0 - 0.5676 * r * r) * (2.0 * t).cos())
            .exp()
        };
        let mut errs = Vec::new();
        for (nr, nt) in [(16, 32), (32, 64)] {
            let c = cap(nr, nt);
            let u = ScalarField::from_fn(c, profile);
            let report = embedding_oracle(&u).unwrap();
            let k_formula = crate::geometry::gauss_curvature_u(&u).unwrap();
            let worst = report
                .k
                .values
                .iter()
                .zip(&k_formula.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            errs.push(worst);
        }
        // Halving h should cut the discrepancy by roughly 4.
        assert!(errs[1] < errs[0] / 2.5, "errs {errs:?}");
    }

    #[test]
    fn closed_form_normal_matches_fd_normal() {
        let c = cap(32, 64);
        let pi = std::f64::consts::PI;
        let u = ScalarField::from_fn(c, move |r, _| (0.05 * (pi * r).cos()).exp());
        let report = embedding_oracle(&u).unwrap();
        assert!(report.max_closed_form_nu_gap <= 1e-3);
    }

    #[test]
    fn steep_graph_is_rejected() {
        let c = cap(16, 32);
        let u = ScalarField::from_fn(c, |r, _| (1.5 * r).exp());
        assert!(matches!(
            embedding_oracle(&u),
            Err(Error::NotSpacelike { .. })
        ));
    }

    #[test]
    fn gauss_formula_residual_is_small_and_shrinks() {
        let pi = std::f64::consts::PI;
        let profile = move |r: f64, t: f64| {
            (0.05 * (pi * r).cos()
                + 0.02 * r.sinh().powi(2) * (1.0 - 0.5676 * r * r) * (2.0 * t).cos())
            .exp()
        };
        let coarse = {
            let c = cap(16, 32);
            gauss_formula_residual(&ScalarField::from_fn(c, profile)).unwrap()
        };
        let fine = {
            let c = cap(32, 64);
            gauss_formula_residual(&ScalarField::from_fn(c, profile)).unwrap()
        };
        assert!(fine < coarse / 2.5, "coarse {coarse}, fine {fine}");
    }
}
