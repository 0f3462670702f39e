//! Quasiconformal-type mapping classes on Euclidean domains: dilatations,
//! p-modules of curve and surface families, and capacity estimates.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dilatations;
pub mod discrete;
pub mod error;
pub mod linalg;
pub mod mappings;
pub mod moduli;
pub mod quadrature;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type SquareMatrix = linalg::Matrix<f64>;
pub type SquareMatrix32 = linalg::Matrix<f32>;
pub type Point64 = linalg::Point<f64>;
pub type Point32 = linalg::Point<f32>;
pub type Mapping = mappings::MappingSpec<f64>;
pub type Mapping32 = mappings::MappingSpec<f32>;
