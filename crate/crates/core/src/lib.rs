//! Composable hierarchical control: numerical kernels, model and controller
//! templates, the converter language, blueprints, the composer, simulated
//! environments and parameter tuning.

pub mod blueprint;
pub mod canonical;
pub mod composer;
pub mod controllers;
pub mod converters;
pub mod measurement;
pub mod models;
pub mod numerics;
pub mod scalar;
pub mod sim;
pub mod tune;

pub use scalar::Scalar;

/// Double-precision dense matrix.
pub type Mat = numerics::Matrix<f64>;
/// Single-precision dense matrix.
pub type Mat32 = numerics::Matrix<f32>;
/// Complex eigenvalue type.
pub type Cplx = num_complex::Complex<f64>;
