//! Dense linear algebra: ridge-shifted SPD solves, thin SVD, and regularized
//! least squares.

mod cholesky;
mod dense;
mod svd;

pub use cholesky::{spd_solve, SpdFactorization};
pub use dense::DenseMatrix;
pub use svd::{svd, Svd};

pub(crate) use dense::{dot, squared_distance, weighted_row_sum};

use crate::error::{Error, Result};

/// Ridge least squares: the `β` minimizing `‖Hβ − Y‖² + λ‖β‖²`.
///
/// With `N ≤ T` this solves the `N × N` system `β = Hᵀ(λI + HHᵀ)⁻¹Y`,
/// otherwise the `T × T` normal equations `β = (λI + HᵀH)⁻¹HᵀY`.
/// `λ = 0` is only well defined for full-rank `H`.
pub fn pinv_solve(h: &DenseMatrix, y: &DenseMatrix, lambda: f64) -> Result<DenseMatrix> {
    if h.rows() != y.rows() {
        return Err(Error::DimensionMismatch {
            expected: h.rows(),
            found: y.rows(),
        });
    }
    if h.rows() <= h.cols() {
        let gram = h.matmul_transpose(h)?;
        let alpha = spd_solve(&gram, lambda, y)?;
        h.transpose_matmul(&alpha)
    } else {
        let gram = h.transpose_matmul(h)?;
        let hty = h.transpose_matmul(y)?;
        spd_solve(&gram, lambda, &hty)
    }
}
