//! Shared fixtures for the benchmarks.

use parametrix::gaussian_core::SpaceTimePair;
use parametrix::parametrix_engine::{DriftSpec, NeumannConfig};

pub fn unit_drift() -> DriftSpec {
    DriftSpec::constant(1.0, 0.5)
}

pub fn config(max_order: usize) -> NeumannConfig {
    NeumannConfig {
        max_order,
        ..NeumannConfig::standard(0.5)
    }
}

pub fn pair() -> SpaceTimePair {
    SpaceTimePair::new(0.5, 1.0, 0.0, -0.5).expect("valid pair")
}
