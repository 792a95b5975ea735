use thiserror::Error;

/// Errors surfaced by geometry evaluation and time stepping.
#[derive(Error, Debug, Clone)]
pub enum Error {
    /// |Dφ|² ≥ 1 somewhere: the graph has left the spacelike regime.
    #[error("field is not spacelike: |Dphi|^2 = {grad_sq} at node {node} (limit 1)")]
    NotSpacelike { node: usize, grad_sq: f64 },

    /// The convexity matrix ι lost positive definiteness.
    #[error("strict convexity lost: eigmin(iota) = {eigmin} at node {node}")]
    NonConvex { node: usize, eigmin: f64 },

    #[error("singular matrix at node {node} (det = {det})")]
    Singular { node: usize, det: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("node index {index} out of range (grid has {len} nodes)")]
    OutOfRange { index: usize, len: usize },

    /// A time step failed admissibility even after one retry at dt/2.
    #[error("flow step failed at t = {t} (dt = {dt}): {source}")]
    StepFailed {
        t: f64,
        dt: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
