use rayon::prelude::*;

use super::dense::{dot, DenseMatrix};
use crate::error::{Error, Result};

/// Relative jitter levels (times `trace / n`) tried after a failed plain factorization.
const JITTER_LEVELS: [f64; 2] = [1e-10, 1e-8];

/// Cholesky factorization of `λI + A` for a symmetric `A`.
#[derive(Debug, Clone)]
pub struct SpdFactorization {
    lower: DenseMatrix,
    // Lᵀ kept alongside so back substitution walks contiguous rows.
    upper: DenseMatrix,
    jitter_applied: f64,
}

impl SpdFactorization {
    /// Factors `λI + a`, escalating diagonal jitter if the plain factorization fails.
    pub fn new(a: &DenseMatrix, lambda: f64) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.cols(),
            });
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "ridge factor must be finite and >= 0, got {lambda}"
            )));
        }
        if !a.is_finite() {
            return Err(Error::NonFinite("matrix to factor"));
        }
        let shifted = a.add_diagonal(lambda);
        if let Some(lower) = cholesky_lower(&shifted) {
            return Ok(Self::from_lower(lower, 0.0));
        }
        let scale = if n == 0 { 0.0 } else { shifted.trace() / n as f64 };
        if scale > 0.0 {
            for level in JITTER_LEVELS {
                let jitter = level * scale;
                if let Some(lower) = cholesky_lower(&shifted.add_diagonal(jitter)) {
                    return Ok(Self::from_lower(lower, jitter));
                }
            }
        }
        Err(Error::NotPositiveDefinite)
    }

    fn from_lower(lower: DenseMatrix, jitter_applied: f64) -> Self {
        let upper = lower.transpose();
        Self {
            lower,
            upper,
            jitter_applied,
        }
    }

    pub fn order(&self) -> usize {
        self.lower.rows()
    }

    pub fn factor(&self) -> &DenseMatrix {
        &self.lower
    }

    pub fn jitter_applied(&self) -> f64 {
        self.jitter_applied
    }

    /// Solves `(λI + A + jitter·I) X = rhs` for every column of `rhs`.
    pub fn solve(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.order();
        if rhs.rows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rhs.rows(),
            });
        }
        let m = rhs.cols();
        if n == 0 || m == 0 {
            return Ok(DenseMatrix::zeros(n, m));
        }
        // Column-major copy: each right-hand side becomes one contiguous chunk.
        let mut cols = rhs.transpose().into_vec();
        cols.par_chunks_mut(n).for_each(|x| {
            for i in 0..n {
                let row = self.lower.row(i);
                x[i] = (x[i] - dot(&row[..i], &x[..i])) / row[i];
            }
            for i in (0..n).rev() {
                let row = self.upper.row(i);
                x[i] = (x[i] - dot(&row[i + 1..], &x[i + 1..])) / row[i];
            }
        });
        Ok(DenseMatrix::new(m, n, cols)?.transpose())
    }
}

fn cholesky_lower(a: &DenseMatrix) -> Option<DenseMatrix> {
    let n = a.rows();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let s = a.get(j, j) - dot(&l.row(j)[..j], &l.row(j)[..j]);
        if !(s > 0.0) || !s.is_finite() {
            return None;
        }
        let d = s.sqrt();
        l.set(j, j, d);
        for i in j + 1..n {
            let v = (a.get(i, j) - dot(&l.row(i)[..j], &l.row(j)[..j])) / d;
            l.set(i, j, v);
        }
    }
    Some(l)
}

/// Solves `(λI + a) X = rhs` for symmetric positive (semi)definite `a`.
pub fn spd_solve(a: &DenseMatrix, lambda: f64, rhs: &DenseMatrix) -> Result<DenseMatrix> {
    SpdFactorization::new(a, lambda)?.solve(rhs)
}
