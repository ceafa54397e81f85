//! Minimum-norm least-squares solves for dense complex systems.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative singular-value cutoff used unless a caller asks otherwise.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

const SVD_MAX_ITER: usize = 1_000;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: matrix has {rows} rows but right-hand side has {rhs} entries")]
    DimensionMismatch { rows: usize, rhs: usize },
    #[error("empty system ({rows}x{cols})")]
    Empty { rows: usize, cols: usize },
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("rank tolerance {0} must lie in (0, 1)")]
    BadTolerance(f64),
    #[error("singular value decomposition did not converge")]
    NoConvergence,
}

/// `a · x = b` with `a` of shape `r × c`.
#[derive(Debug, Clone)]
pub struct ComplexLinearSystem {
    pub a: CMatrix,
    pub b: CVector,
}

impl ComplexLinearSystem {
    pub fn new(a: CMatrix, b: CVector) -> Result<Self, LinalgError> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(LinalgError::Empty {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        if a.nrows() != b.len() {
            return Err(LinalgError::DimensionMismatch {
                rows: a.nrows(),
                rhs: b.len(),
            });
        }
        Ok(ComplexLinearSystem { a, b })
    }
}

#[derive(Debug, Clone)]
pub struct MinNormSolution {
    pub x: CVector,
    /// `‖a·x − b‖₂`.
    pub residual_norm: f64,
    /// Number of singular values kept.
    pub rank: usize,
}

/// Minimum-norm least-squares solution through the SVD.
///
/// Singular values at or below `rank_tol · σ_max` are treated as zero, so
/// the returned `x` has no component along the corresponding right singular
/// vectors.
pub fn min_norm_solve(sys: &ComplexLinearSystem, rank_tol: f64) -> Result<MinNormSolution, LinalgError> {
    if !(rank_tol > 0.0 && rank_tol < 1.0) {
        return Err(LinalgError::BadTolerance(rank_tol));
    }
    let (a, b) = (&sys.a, &sys.b);
    if a.nrows() != b.len() {
        return Err(LinalgError::DimensionMismatch {
            rows: a.nrows(),
            rhs: b.len(),
        });
    }
    if a.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(LinalgError::NonFinite("matrix"));
    }
    if b.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(LinalgError::NonFinite("right-hand side"));
    }

    let svd = a
        .clone()
        .try_svd(true, true, f64::EPSILON, SVD_MAX_ITER)
        .ok_or(LinalgError::NoConvergence)?;
    let u = svd.u.as_ref().ok_or(LinalgError::NoConvergence)?;
    let v_t = svd.v_t.as_ref().ok_or(LinalgError::NoConvergence)?;
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = rank_tol * sigma_max;

    let mut coeffs = u.ad_mul(b);
    let mut rank = 0;
    for (c, &s) in coeffs.iter_mut().zip(svd.singular_values.iter()) {
        if s > cutoff && s > 0.0 {
            *c /= s;
            rank += 1;
        } else {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    let x = v_t.ad_mul(&coeffs);
    let residual_norm = (a * &x - b).norm();
    Ok(MinNormSolution { x, residual_norm, rank })
}
