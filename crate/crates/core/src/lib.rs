//! Numerical workbench for constant-angle surfaces with parallel mean
//! curvature in M^n(c)×ℝ.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod ambient;
pub mod error;
pub mod frenet;
pub mod reconstruct;
pub mod sampled;
pub mod surface;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
