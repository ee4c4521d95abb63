//! Constant mean curvature graphs in the Heisenberg spaces `Nil(τ)`.

// `!(x <= tol)` is deliberate: a NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barriers;
pub mod domain;
pub mod error;
pub mod geometry;
pub mod io;
pub mod numeric;
pub mod operators;
pub mod solver;

pub use error::{Error, Result};
