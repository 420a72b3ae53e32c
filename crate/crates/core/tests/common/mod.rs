//! Independent reference implementations used as test oracles. Everything here
//! is written with plain loops over `Vec<Vec<f64>>` and shares no code with
//! the library's numerical routines.
#![allow(dead_code)]

use dyntex_core::{DenseMatrix, Frame, FrameSequence, Geometry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Mat = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Mat {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(lo..hi)).collect())
        .collect()
}

pub fn to_dense(m: &Mat) -> DenseMatrix {
    DenseMatrix::from_rows(m).unwrap()
}

pub fn to_mat(m: &DenseMatrix) -> Mat {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

pub fn transpose(a: &Mat) -> Mat {
    let (r, c) = (a.len(), a[0].len());
    (0..c).map(|j| (0..r).map(|i| a[i][j]).collect()).collect()
}

/// Textbook triple loop.
pub fn naive_matmul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    assert_eq!(a[0].len(), k);
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut s = 0.0;
            for t in 0..k {
                s += a[i][t] * b[t][j];
            }
            out[i][j] = s;
        }
    }
    out
}

pub fn add_ridge(a: &Mat, lambda: f64) -> Mat {
    let mut out = a.clone();
    for (i, row) in out.iter_mut().enumerate() {
        row[i] += lambda;
    }
    out
}

/// Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan_inverse(a: &Mat) -> Mat {
    let n = a.len();
    let mut aug: Mat = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| aug[x][col].abs().total_cmp(&aug[y][col].abs()))
            .unwrap();
        aug.swap(col, pivot);
        let p = aug[col][col];
        assert!(p.abs() > 1e-300, "singular matrix in oracle");
        for v in aug[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = aug[r][col];
                if f != 0.0 {
                    for c in 0..2 * n {
                        aug[r][c] -= f * aug[col][c];
                    }
                }
            }
        }
    }
    aug.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// `(XᵀX + λI)⁻¹ XᵀY`.
pub fn ridge_primal(x: &Mat, y: &Mat, lambda: f64) -> Mat {
    let xt = transpose(x);
    let inv = gauss_jordan_inverse(&add_ridge(&naive_matmul(&xt, x), lambda));
    naive_matmul(&inv, &naive_matmul(&xt, y))
}

pub fn frob(a: &Mat) -> f64 {
    a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn frob_diff(a: &Mat, b: &Mat) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn rel_diff(a: &Mat, b: &Mat) -> f64 {
    frob_diff(a, b) / frob(b).max(1e-300)
}

pub fn vec_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(1e-300)
}

/// Median of all `‖r_i − r_j‖²`, `i < j`, via a full sort.
pub fn brute_median_sq_dist(rows: &Mat) -> f64 {
    let mut d = Vec::new();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let s: f64 = rows[i]
                .iter()
                .zip(&rows[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            d.push(s);
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = d.len();
    if m % 2 == 1 {
        d[m / 2]
    } else {
        (d[m / 2 - 1] + d[m / 2]) / 2.0
    }
}

/// SSIM by visiting every window position and summing the full 2-D Gaussian
/// window directly.
pub fn naive_ssim(x: &[f64], y: &[f64], w: usize, h: usize) -> f64 {
    let k = 11usize;
    let sigma = 1.5f64;
    let c1 = (0.01f64 * 255.0).powi(2);
    let c2 = (0.03f64 * 255.0).powi(2);
    let r = (k / 2) as f64;
    let mut win = vec![vec![0.0; k]; k];
    let mut total = 0.0;
    for (a, row) in win.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            let (da, db) = (a as f64 - r, b as f64 - r);
            *v = (-(da * da + db * db) / (2.0 * sigma * sigma)).exp();
            total += *v;
        }
    }
    for row in win.iter_mut() {
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    let mut acc = 0.0;
    let mut count = 0usize;
    for top in 0..=h - k {
        for left in 0..=w - k {
            let (mut mx, mut my) = (0.0, 0.0);
            for a in 0..k {
                for b in 0..k {
                    let idx = (top + a) * w + left + b;
                    mx += win[a][b] * x[idx];
                    my += win[a][b] * y[idx];
                }
            }
            let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
            for a in 0..k {
                for b in 0..k {
                    let idx = (top + a) * w + left + b;
                    vx += win[a][b] * (x[idx] - mx) * (x[idx] - mx);
                    vy += win[a][b] * (y[idx] - my) * (y[idx] - my);
                    cxy += win[a][b] * (x[idx] - mx) * (y[idx] - my);
                }
            }
            acc += ((2.0 * mx * my + c1) * (2.0 * cxy + c2))
                / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    acc / count as f64
}

pub fn naive_psnr(x: &[f64], y: &[f64]) -> f64 {
    let mse: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / x.len() as f64;
    if mse == 0.0 {
        100.0
    } else {
        (10.0 * (255.0f64 * 255.0 / mse).log10()).min(100.0)
    }
}

pub fn random_sequence(rng: &mut ChaCha8Rng, n: usize, g: Geometry) -> FrameSequence {
    FrameSequence::new(
        (0..n)
            .map(|_| {
                Frame::new(g, (0..g.dim()).map(|_| rng.gen_range(0.0..255.0)).collect()).unwrap()
            })
            .collect(),
    )
    .unwrap()
}

/// Sequence of 1-pixel-high frames from explicit rows.
pub fn seq_from_rows(rows: &Mat) -> FrameSequence {
    let g = Geometry::new(rows[0].len(), 1, 1);
    FrameSequence::new(rows.iter().map(|r| Frame::new(g, r.clone()).unwrap()).collect()).unwrap()
}

/// Column-wise temporal mean and centered rows, computed directly.
pub fn center_rows(rows: &Mat) -> (Vec<f64>, Mat) {
    let n = rows.len() as f64;
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let centered = rows
        .iter()
        .map(|r| r.iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect();
    (mean, centered)
}
