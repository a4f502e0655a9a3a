//! Entropic optimal transport between Gaussian measures and the Wasserstein
//! gradient flow of the Sinkhorn divergence.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`). The aliases
//! at the crate root fix the scalar to `f64`, which is what the tolerances in
//! the documentation assume.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod flow;
pub mod gaussian_eot;
pub mod oracle;
pub mod scalar;
pub mod symlin;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix = symlin::Matrix<f64>;
pub type SymMat = symlin::SymMat<f64>;
pub type SpectralDecomp = symlin::SpectralDecomp<f64>;
pub type Gaussian = gaussian_eot::Gaussian<f64>;
pub type Epsilon = gaussian_eot::Epsilon<f64>;
pub type AffineField = gaussian_eot::AffineField<f64>;
pub type QuadraticPotential = gaussian_eot::QuadraticPotential<f64>;
pub type FlowConfig = flow::FlowConfig<f64>;
pub type FlowState = flow::FlowState<f64>;
pub type Trajectory = flow::Trajectory<f64>;
pub type EigenFlowState = flow::EigenFlowState<f64>;
pub type FactorState = flow::FactorState<f64>;
pub type RateConstants = analysis::RateConstants<f64>;
pub type LimitReport = analysis::LimitReport<f64>;
pub type DiscreteMeasure = oracle::DiscreteMeasure<f64>;
pub type SinkhornResult = oracle::SinkhornResult<f64>;

pub type SymMat32 = symlin::SymMat<f32>;
pub type Gaussian32 = gaussian_eot::Gaussian<f32>;
pub type Epsilon32 = gaussian_eot::Epsilon<f32>;
