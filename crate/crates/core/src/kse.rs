//! Kernel similarity embedding: a kernel ridge regressor from each centered
//! frame to its successor, rolled out autoregressively to synthesize video.
//!
//! Training keeps the explanatory frames `x_1..x_{N−1}` and the coefficient
//! matrix `A = (λI + Ω)⁻¹ Y`, where `Ω[i][j] = K(x_i, x_j)` and `Y` stacks the
//! response frames `x_2..x_N`. The next frame for an input `s` is
//! `k(s)ᵀ A + S̄` with `k(s)_i = K(s − S̄, x_i)`.

use std::path::Path;

use crate::codec::{self, Reader, Writer};
use crate::error::{Error, Result};
use crate::frameio::{self, center, check_geometry, Frame, FrameSequence, Geometry};
use crate::kernels::{gram_matrix, kernel_vector_unchecked, KernelConfig, KernelSpec};
use crate::solver::{weighted_row_sum, DenseMatrix, SpdFactorization};

pub const KSE_MAGIC: &[u8; 4] = b"KSE1";

/// Smallest accepted ridge factor.
pub const MIN_LAMBDA: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct KseModel {
    kernel: KernelSpec,
    lambda: f64,
    jitter_applied: f64,
    geometry: Geometry,
    temporal_mean: Vec<f64>,
    /// `(N−1) × D`, centered frames `1..N−1`.
    explanatory: DenseMatrix,
    /// `(N−1) × D`, `(λI + Ω)⁻¹ Y`.
    coefficients: DenseMatrix,
    /// Centered frame `N`, the last response row.
    final_response: Vec<f64>,
}

/// Seed frame (uncentered) and number of frames to produce, seed included.
#[derive(Debug, Clone)]
pub struct SynthesisRequest {
    pub seed: Frame,
    pub count: usize,
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda >= MIN_LAMBDA) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be finite and >= {MIN_LAMBDA:e}, got {lambda}"
        )));
    }
    Ok(())
}

/// Trains with a fully specified kernel.
pub fn train(seq: &FrameSequence, kernel: &KernelSpec, lambda: f64) -> Result<KseModel> {
    train_with(seq, &KernelConfig::from(*kernel), lambda)
}

/// Trains, resolving data-dependent kernel defaults (e.g. `gamma=auto`) on the
/// explanatory frames.
pub fn train_with(seq: &FrameSequence, kernel: &KernelConfig, lambda: f64) -> Result<KseModel> {
    check_lambda(lambda)?;
    let centered = center(seq)?;
    if centered.centered().as_slice().iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateSequence);
    }
    let pair = frameio::make_training_pair(&centered)?;
    let kernel = kernel.resolve(&pair.explanatory)?;
    let omega = gram_matrix(&pair.explanatory, &kernel)?;
    let factor = SpdFactorization::new(omega.as_matrix(), lambda)?;
    let coefficients = factor.solve(&pair.response)?;
    if !coefficients.is_finite() {
        return Err(Error::NonFinite("kse coefficients"));
    }
    let last = pair.response.rows() - 1;
    Ok(KseModel {
        kernel,
        lambda,
        jitter_applied: factor.jitter_applied(),
        geometry: seq.geometry(),
        temporal_mean: centered.temporal_mean().to_vec(),
        final_response: pair.response.row(last).to_vec(),
        explanatory: pair.explanatory,
        coefficients,
    })
}

impl KseModel {
    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn jitter_applied(&self) -> f64 {
        self.jitter_applied
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn temporal_mean(&self) -> &[f64] {
        &self.temporal_mean
    }

    pub fn explanatory(&self) -> &DenseMatrix {
        &self.explanatory
    }

    pub fn coefficients(&self) -> &DenseMatrix {
        &self.coefficients
    }

    pub fn final_response(&self) -> &[f64] {
        &self.final_response
    }

    /// Number of training pairs, `N − 1`.
    pub fn n_pairs(&self) -> usize {
        self.explanatory.rows()
    }

    pub fn training_len(&self) -> usize {
        self.n_pairs() + 1
    }

    /// Centered response rows reconstructed from the stored frames.
    pub fn response(&self) -> DenseMatrix {
        let n = self.n_pairs();
        let d = self.geometry.dim();
        let mut data = Vec::with_capacity(n * d);
        data.extend_from_slice(&self.explanatory.as_slice()[d..]);
        data.extend_from_slice(&self.final_response);
        DenseMatrix::new(n, d, data).expect("stored shapes are consistent")
    }

    /// Training frame `index` (0-based, `0..N`) with the mean restored.
    pub fn training_frame(&self, index: usize) -> Result<Frame> {
        let centered = if index < self.n_pairs() {
            self.explanatory.row(index)
        } else if index == self.n_pairs() {
            &self.final_response
        } else {
            return Err(Error::InsufficientFrames {
                needed: index + 1,
                available: self.training_len(),
            });
        };
        let data = centered
            .iter()
            .zip(&self.temporal_mean)
            .map(|(c, m)| c + m)
            .collect();
        Frame::new(self.geometry, data)
    }

    /// `‖(λ' I + Ω) A − Y‖_F / ‖Y‖_F` with `λ' = λ + jitter`.
    pub fn training_residual(&self) -> Result<f64> {
        let omega = gram_matrix(&self.explanatory, &self.kernel)?;
        let shifted = omega
            .as_matrix()
            .add_diagonal(self.lambda + self.jitter_applied);
        let y = self.response();
        let r = shifted.matmul(&self.coefficients)?.sub(&y)?;
        Ok(r.frobenius_norm() / y.frobenius_norm())
    }

    /// One-step prediction on a centered vector.
    pub fn predict_centered(&self, centered: &[f64]) -> Result<Vec<f64>> {
        if centered.len() != self.geometry.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.geometry.dim(),
                found: centered.len(),
            });
        }
        if !centered.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("prediction input"));
        }
        let k = kernel_vector_unchecked(centered, &self.explanatory, &self.kernel);
        Ok(weighted_row_sum(&k, &self.coefficients))
    }

    /// Next frame for an uncentered input; output is not clamped.
    pub fn predict_next(&self, frame: &Frame) -> Result<Frame> {
        check_geometry(self.geometry, frame.geometry())?;
        let centered: Vec<f64> = frame
            .data()
            .iter()
            .zip(&self.temporal_mean)
            .map(|(v, m)| v - m)
            .collect();
        let mut out = self.predict_centered(&centered)?;
        for (o, m) in out.iter_mut().zip(&self.temporal_mean) {
            *o += m;
        }
        Frame::new(self.geometry, out)
    }

    /// Frame 1 is the seed, frame `l` is `predict_next(frame l−1)`.
    pub fn synthesize(&self, req: &SynthesisRequest) -> Result<FrameSequence> {
        self.synthesize_from(&req.seed, req.count)
    }

    pub fn synthesize_from(&self, seed: &Frame, count: usize) -> Result<FrameSequence> {
        rollout(self.geometry, seed, count, |f| self.predict_next(f))
    }

    pub fn save(&self, path: &Path) -> Result<usize> {
        let mut w = Writer::new(KSE_MAGIC);
        w.geometry(self.geometry);
        w.u32(self.n_pairs() as u32);
        w.u32(self.geometry.dim() as u32);
        w.f64(self.lambda);
        w.f64(self.jitter_applied);
        w.text(&self.kernel.to_string());
        w.f64s(&self.temporal_mean);
        w.f64s(self.explanatory.as_slice());
        w.f64s(self.coefficients.as_slice());
        w.f64s(&self.final_response);
        w.finish(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&codec::read_file(path)?)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::open(bytes, KSE_MAGIC)?;
        let geometry = r.geometry()?;
        let n_pairs = r.u32("n_pairs")? as usize;
        let dim = r.u32("dim")? as usize;
        codec::check_dim(geometry, dim)?;
        if n_pairs == 0 {
            return Err(Error::Corrupt("model has no training pairs".into()));
        }
        let lambda = r.f64("lambda")?;
        let jitter_applied = r.f64("jitter")?;
        let kernel_text = r.text("kernel spec")?;
        let kernel: KernelSpec = kernel_text
            .parse()
            .map_err(|e| Error::Corrupt(format!("kernel spec: {e}")))?;
        let temporal_mean = r.f64s(dim, "temporal mean")?;
        let explanatory = r.matrix(n_pairs, dim, "explanatory frames")?;
        let coefficients = r.matrix(n_pairs, dim, "coefficients")?;
        let final_response = r.f64s(dim, "final response")?;
        r.finish()?;

        check_lambda(lambda).map_err(|e| Error::Corrupt(e.to_string()))?;
        if !(jitter_applied.is_finite() && jitter_applied >= 0.0) {
            return Err(Error::Corrupt("negative or non-finite jitter".into()));
        }
        codec::ensure_finite(&temporal_mean, "temporal mean")?;
        codec::ensure_finite(explanatory.as_slice(), "explanatory frames")?;
        codec::ensure_finite(coefficients.as_slice(), "coefficients")?;
        codec::ensure_finite(&final_response, "final response")?;
        Ok(Self {
            kernel,
            lambda,
            jitter_applied,
            geometry,
            temporal_mean,
            explanatory,
            coefficients,
            final_response,
        })
    }
}

/// Shared autoregressive loop for every frame-to-frame model.
pub(crate) fn rollout(
    geometry: Geometry,
    seed: &Frame,
    count: usize,
    mut step: impl FnMut(&Frame) -> Result<Frame>,
) -> Result<FrameSequence> {
    check_geometry(geometry, seed.geometry())?;
    if count == 0 {
        return Err(Error::InvalidParameter("synthesis count must be >= 1".into()));
    }
    let mut frames = Vec::with_capacity(count);
    frames.push(seed.clone());
    for _ in 1..count {
        let next = step(frames.last().expect("non-empty"))?;
        frames.push(next);
    }
    FrameSequence::new(frames)
}
