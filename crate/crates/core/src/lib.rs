//! Fundamental solution of u_t = ½u_xx + b(t,x)|x|^{−γ}u_x by the parametrix method.

pub mod bounds;
pub mod error;
pub mod gaussian_core;
pub mod parametrix_engine;
pub mod singular_quadrature;
pub mod special_functions;
pub mod validation;

#[cfg(test)]
pub(crate) mod test_oracles;

pub use error::{Error, Result};
