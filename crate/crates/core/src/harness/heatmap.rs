//! Gram matrix export and the periodicity check on its first row.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::frameio::{center, make_training_pair, write_pgm, FrameSequence};
use crate::kernels::{gram_matrix, GramMatrix, KernelConfig};
use crate::solver::DenseMatrix;

/// Gram matrix of the centered explanatory frames, exactly as training builds it.
pub fn sequence_gram(seq: &FrameSequence, kernel: &KernelConfig) -> Result<GramMatrix> {
    let centered = center(seq)?;
    let pair = make_training_pair(&centered)?;
    let spec = kernel.resolve(&pair.explanatory)?;
    gram_matrix(&pair.explanatory, &spec)
}

/// One CSV line per row, values printed with shortest round-trip formatting.
pub fn gram_csv(gram: &GramMatrix) -> String {
    let mut out = String::new();
    for i in 0..gram.n() {
        let row: Vec<String> = gram.row(i).iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{}", row.join(",")).unwrap();
    }
    out
}

pub fn read_gram_csv(path: &Path) -> Result<DenseMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rows = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|e| Error::Decode {
                        path: path.to_path_buf(),
                        reason: format!("bad value {v:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    DenseMatrix::from_rows(&rows)
}

/// Min-max normalization to 0..=255; a constant matrix maps to all zeros.
pub fn heatmap_pixels(gram: &GramMatrix) -> Vec<u8> {
    let values = gram.as_matrix().as_slice();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    values
        .iter()
        .map(|&v| {
            if span > 0.0 {
                (255.0 * (v - min) / span).round().clamp(0.0, 255.0) as u8
            } else {
                0
            }
        })
        .collect()
}

/// Writes the raw CSV and a P5 rendering; returns the Gram matrix.
pub fn export_gram_heatmap(
    seq: &FrameSequence,
    kernel: &KernelConfig,
    csv_path: &Path,
    pgm_path: &Path,
) -> Result<GramMatrix> {
    let gram = sequence_gram(seq, kernel)?;
    fs::write(csv_path, gram_csv(&gram)).map_err(|e| Error::io(csv_path, e))?;
    write_pgm(pgm_path, gram.n(), gram.n(), &heatmap_pixels(&gram))?;
    Ok(gram)
}

/// Pearson correlation between `row[..n-lag]` and `row[lag..]` for every lag
/// that leaves at least three overlapping samples. Undefined lags give 0.
pub fn row_autocorrelation(row: &[f64]) -> Vec<f64> {
    let n = row.len();
    (0..n.saturating_sub(2))
        .map(|lag| pearson(&row[..n - lag], &row[lag..]))
        .collect()
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len() as f64;
    let ma = a.iter().sum::<f64>() / len;
    let mb = b.iter().sum::<f64>() / len;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa > 0.0 && sbb > 0.0 {
        sab / (saa * sbb).sqrt()
    } else {
        0.0
    }
}

/// First lag ≥ 1 that is a local maximum of the autocorrelation.
pub fn dominant_period(autocorrelation: &[f64]) -> Option<usize> {
    (1..autocorrelation.len().saturating_sub(1)).find(|&l| {
        autocorrelation[l] > autocorrelation[l - 1] && autocorrelation[l] >= autocorrelation[l + 1]
    })
}

/// Band period of the heatmap as seen from its first row.
pub fn gram_band_period(gram: &GramMatrix) -> Option<usize> {
    dominant_period(&row_autocorrelation(gram.row(0)))
}
