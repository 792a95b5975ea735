//! Shared fixtures for the criterion benchmarks.

use std::sync::Arc;

use igcf::{build_cap, HyperbolicCap, InitialData, ScalarField};

pub fn bench_cap(nr: usize) -> Arc<HyperbolicCap> {
    Arc::new(build_cap(2, 1.0, nr, 2 * nr).unwrap())
}

pub fn bench_phi(cap: Arc<HyperbolicCap>) -> ScalarField {
    InitialData::default().build(cap).unwrap()
}
