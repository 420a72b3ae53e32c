//! Thin SVD by one-sided (Hestenes) Jacobi rotations.

use super::dense::{axpy, dot, DenseMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Thin singular value decomposition `a = U · diag(S) · Vᵀ`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `p × r`, orthonormal columns.
    pub u: DenseMatrix,
    /// Length `r`, non-negative, non-increasing.
    pub s: Vec<f64>,
    /// `q × r`, orthonormal columns.
    pub v: DenseMatrix,
}

impl Svd {
    pub fn rank(&self, rel_tol: f64) -> usize {
        let top = self.s.first().copied().unwrap_or(0.0);
        self.s.iter().filter(|&&s| s > rel_tol * top && s > 0.0).count()
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (x, s) in us.row_mut(i).iter_mut().zip(&self.s) {
                *x *= s;
            }
        }
        us.matmul_transpose(&self.v)
            .expect("svd factors have consistent shapes")
    }
}

/// Computes the thin SVD of a `p × q` matrix, `r = min(p, q)`.
pub fn svd(a: &DenseMatrix) -> Result<Svd> {
    if !a.is_finite() {
        return Err(Error::NonFinite("svd input"));
    }
    if a.rows() >= a.cols() {
        tall_svd(a)
    } else {
        let t = tall_svd(&a.transpose())?;
        Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        })
    }
}

fn tall_svd(a: &DenseMatrix) -> Result<Svd> {
    let (p, q) = (a.rows(), a.cols());
    // Work on columns of `a` as contiguous rows.
    let mut w: Vec<Vec<f64>> = (0..q).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..q)
        .map(|j| {
            let mut e = vec![0.0; q];
            e[j] = 1.0;
            e
        })
        .collect();

    // A pair counts as orthogonal once |cos| is at the rounding level of a
    // length-p dot product. Columns at rounding level relative to the whole
    // matrix carry no information, and rotating them never settles.
    let tol = (p as f64).sqrt() * f64::EPSILON;
    let frob_sq: f64 = w.iter().map(|c| dot(c, c)).sum();
    let floor = f64::EPSILON * f64::EPSILON * frob_sq;

    let mut converged = q < 2;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..q {
            for j in i + 1..q {
                let alpha = dot(&w[i], &w[i]);
                let beta = dot(&w[j], &w[j]);
                if alpha <= floor || beta <= floor {
                    continue;
                }
                let gamma = dot(&w[i], &w[j]);
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, i, j, c, s);
                rotate(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNoConvergence(MAX_SWEEPS));
    }

    let mut order: Vec<(usize, f64)> = w
        .iter()
        .enumerate()
        .map(|(j, col)| (j, dot(col, col).sqrt()))
        .collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let top = order.first().map_or(0.0, |o| o.1);
    let negligible = top * f64::EPSILON * p.max(q) as f64;

    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(q);
    let mut s = Vec::with_capacity(q);
    let mut v_cols: Vec<Vec<f64>> = Vec::with_capacity(q);
    let mut pending = Vec::new();
    for &(j, sigma) in &order {
        if sigma > negligible && sigma > 0.0 {
            u_cols.push(w[j].iter().map(|x| x / sigma).collect());
            s.push(sigma);
        } else {
            pending.push(u_cols.len());
            u_cols.push(Vec::new());
            s.push(0.0);
        }
        v_cols.push(v[j].clone());
    }
    complete_orthonormal(&mut u_cols, &pending, p);

    Ok(Svd {
        u: from_columns(&u_cols, p),
        s,
        v: from_columns(&v_cols, q),
    })
}

fn rotate(cols: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64) {
    let (head, tail) = cols.split_at_mut(j);
    let (ci, cj) = (&mut head[i], &mut tail[0]);
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let (xi, yj) = (*x, *y);
        *x = c * xi - s * yj;
        *y = s * xi + c * yj;
    }
}

/// Fills the empty slots listed in `pending` with unit vectors orthogonal to all others.
fn complete_orthonormal(cols: &mut [Vec<f64>], pending: &[usize], p: usize) {
    let mut candidate = 0;
    for &slot in pending {
        while candidate < p {
            let mut e = vec![0.0; p];
            e[candidate] = 1.0;
            candidate += 1;
            // two Gram-Schmidt passes
            for _ in 0..2 {
                for (k, col) in cols.iter().enumerate() {
                    if k != slot && !col.is_empty() {
                        let proj = dot(col, &e);
                        axpy(-proj, col, &mut e);
                    }
                }
            }
            let norm = dot(&e, &e).sqrt();
            if norm > 1e-8 {
                cols[slot] = e.into_iter().map(|x| x / norm).collect();
                break;
            }
        }
    }
}

fn from_columns(cols: &[Vec<f64>], rows: usize) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(rows, cols.len());
    for (j, col) in cols.iter().enumerate() {
        for (i, &x) in col.iter().enumerate() {
            m.set(i, j, x);
        }
    }
    m
}
