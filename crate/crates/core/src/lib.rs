//! Orthogonal polynomials, spectral operators, sharp L² Bernstein constants,
//! localized kernels and L^p Bernstein-ratio diagnostics on the simplex
//! `{x ∈ R^d : x_i >= 0, |x| <= 1}` with Jacobi and doubling weights.

pub mod basis;
mod dd;
pub mod error;
pub mod forms;
pub mod jacobi;
pub mod kernels;
pub mod lp;
pub mod measure;
pub mod par;
pub mod poly;

pub use error::{Error, Result};
pub use measure::{distance, SimplexPoint};
pub use poly::{JacobiParams, MultiIndex, Polynomial};
