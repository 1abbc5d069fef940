//! Multiplierless 16-point DCT approximation.
//!
//! The crate provides the integer kernel `T` with entries in `{0, ±1}`, its
//! orthogonalized form `Ĉ = S·T`, a five-stage butterfly evaluation that
//! costs 60 additions and nothing else, the usual approximation and coding
//! figures of merit against the exact DCT, and a JPEG-like 16×16 block
//! compression harness with PSNR/SSIM scoring.
//!
//! Real-valued math is generic over [`Real`] (`f32` or `f64`); the fast
//! algorithm is generic over [`Sample`], which also admits the operation
//! counting scalar [`Tracked`]. The aliases below pin the common `f64` case.

pub mod cli;
pub mod codec;
pub mod corpus;
pub mod error;
pub mod fastalg;
pub mod kernels;
pub mod matrix;
pub mod metrics;
pub mod scalar;

pub use error::{Error, Result};
pub use fastalg::{FactorizationPlan, OpCount, SparseStage, Tracked};
pub use kernels::{DiagonalScale, IntKernel16, OrthonormalTransform};
pub use matrix::SquareMatrix;
pub use scalar::{Real, Sample};

/// Transform length handled by the integer kernel and its fast algorithm.
pub const N: usize = 16;

/// A 16×16 block of samples or coefficients, row-major.
pub type Block<T> = [[T; N]; N];

pub type Transform = OrthonormalTransform<f64>;
pub type Transform32 = OrthonormalTransform<f32>;
pub type Scale = DiagonalScale<f64>;
pub type Covariance = metrics::CovarianceModel<f64>;
pub type Report = metrics::MetricsReport<f64>;
pub type Matrix = SquareMatrix<f64>;
