//! Exact linear algebra over prime fields and the rationals.
//!
//! Matrices are dense and row-major. Subspaces are passed around as matrices
//! whose columns span them.

mod field;
mod mat;

pub use field::{parse_rational, Field, Scalar, GF2, GF3};
pub use mat::{Mat, Quotient, Rref};
