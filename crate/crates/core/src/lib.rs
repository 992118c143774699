//! Numerical laboratory for three-circle theorems on rotationally symmetric
//! Kähler models: comparison ODEs for the distance Hessian, growth of
//! holomorphic functions and dimension bounds for spaces of polynomial growth.

// Negated comparisons are NaN guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod metric;
pub mod numerics;

pub use error::{LabError, Result};
pub mod comparison;
pub mod dimension;
pub mod growth;
pub mod poly;
pub mod report;
pub mod suite;
