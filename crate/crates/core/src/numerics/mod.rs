//! Dense complex linear algebra, special functions, and quadrature.

pub mod linalg;
// Quadrature nodes and reference constants are kept at their published precision.
#[allow(clippy::excessive_precision)]
pub mod quadrature;
#[allow(clippy::excessive_precision)]
pub mod special;

pub use linalg::{
    min_norm_solve, CMatrix, CVector, ComplexLinearSystem, LinalgError, MinNormSolution, DEFAULT_RANK_TOL,
};
pub use quadrature::{quadrature, quadrature_semi_infinite, QuadratureError};
pub use special::{
    exponential_integral_ei, ln_gamma, lower_incomplete_gamma_regularized, scaled_exp_e1,
    upper_incomplete_gamma_regularized, SpecialFnError,
};
