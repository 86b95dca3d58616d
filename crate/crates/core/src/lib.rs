//! Asymptotic variance, cost and convergence analysis of two-component Gibbs samplers.

pub mod convergence;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod par;
pub mod projection;
pub mod sampler;
pub mod target;
pub mod variance;

pub use error::{Error, Result};
