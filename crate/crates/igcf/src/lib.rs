//! Inverse Gauss curvature flow of strictly convex spacelike radial graphs
//! over a convex cap of the hyperbolic plane in Lorentz-Minkowski space, with
//! zero Neumann boundary data.
//!
//! The crate is organized as a pipeline:
//! - [`cap`]: the discretized domain (geodesic polar grid, metric,
//!   Christoffel symbols, curvature self-check);
//! - [`field`]: grid fields and ghost-ring extension (antipodal pole ghost,
//!   Neumann outer ghost);
//! - [`ops`]: covariant finite-difference calculus and 2×2 symmetric matrix
//!   algebra;
//! - [`geometry`]: graph geometry (tilt, induced metric, second fundamental
//!   form, Gauss curvature both ways, the flow speed Q and its
//!   linearization);
//! - [`embedding`]: an independent oracle that recomputes everything from the
//!   ambient embedding X = u·x;
//! - [`flow`]: explicit adaptive time stepping in raw and rescaled form;
//! - [`monitors`]: monitor series, a priori estimate checks, the comparison
//!   principle and curvature cross-checks.

pub mod cap;
pub mod embedding;
pub mod error;
pub mod field;
pub mod flow;
pub mod geometry;
pub mod monitors;
pub mod ops;

pub use cap::{build_cap, Christoffel, GammaDerivatives, HyperbolicCap, RingData};
pub use embedding::{
    embedding_oracle, embedding_oracle_analytic, gauss_formula_residual, EmbeddingReport,
};
pub use error::{Error, Result};
pub use field::{apply_neumann_ghost, CovectorField, ExtendedField, ScalarField, SymMatrixField};
pub use flow::{
    adaptive_dt, check_admissible, euler_step, run_flow, rescale_state, AdmissibilityReport,
    FlowConfig, FlowMode, FlowOutcome, FlowState, InitialData, Snapshot,
};
pub use geometry::{
    gauss_curvature_phi, gauss_curvature_u, induced_metric, iota_matrix, linearization, rhs_q,
    second_fundamental, tilt_v, Derivs, GeometryBundle,
};
pub use monitors::{
    comparison_check, curvature_consistency, estimate_report, neumann_residual,
    random_admissible_pair, sample_state, Baselines, ComparisonOutcome, CurvatureConsistency,
    EstimateCheck, EstimateReport, MonitorSample, MonitorSeries,
};
pub use ops::{
    cov_gradient, cov_hessian, grad_norm_sq, ldlt_det, sym2_algebra, DiffScheme, SymMat2,
};
