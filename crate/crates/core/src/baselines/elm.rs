use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{self, Reader, Writer};
use crate::error::{Error, Result};
use crate::frameio::{center, check_geometry, make_training_pair, Frame, FrameSequence, Geometry};
use crate::kse::rollout;
use crate::solver::{dot, pinv_solve, weighted_row_sum, DenseMatrix};

pub const ELM_MAGIC: &[u8; 4] = b"ELM1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    /// `1 / (1 + e^{−z})`
    #[default]
    Sigmoid,
    Tanh,
}

impl Activation {
    #[inline]
    fn apply(&self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
        })
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::InvalidParameter(format!(
                "unknown activation {other:?} (expected sigmoid or tanh)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElmConfig {
    pub hidden_nodes: usize,
    pub lambda: f64,
    pub rng_seed: u64,
    pub activation: Activation,
}

impl Default for ElmConfig {
    fn default() -> Self {
        Self {
            hidden_nodes: 500,
            lambda: 1e-6,
            rng_seed: 0,
            activation: Activation::Sigmoid,
        }
    }
}

/// Random-feature extreme learning machine mapping each centered frame to the next.
#[derive(Debug, Clone, PartialEq)]
pub struct ElmModel {
    geometry: Geometry,
    /// `T × D`, uniform in [−1, 1].
    input_weights: DenseMatrix,
    biases: Vec<f64>,
    activation: Activation,
    /// `T × D` output weights.
    beta: DenseMatrix,
    temporal_mean: Vec<f64>,
    rng_seed: u64,
    lambda: f64,
}

pub fn elm_train(seq: &FrameSequence, config: &ElmConfig) -> Result<ElmModel> {
    if config.hidden_nodes == 0 {
        return Err(Error::InvalidParameter("hidden node count must be >= 1".into()));
    }
    if !(config.lambda.is_finite() && config.lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "elm lambda must be finite and > 0, got {}",
            config.lambda
        )));
    }
    let centered = center(seq)?;
    if centered.centered().as_slice().iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateSequence);
    }
    let pair = make_training_pair(&centered)?;
    let d = pair.dim;
    let t = config.hidden_nodes;

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let weights: Vec<f64> = (0..t * d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let biases: Vec<f64> = (0..t).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let input_weights = DenseMatrix::new(t, d, weights)?;

    let mut h = pair.explanatory.matmul_transpose(&input_weights)?;
    for i in 0..h.rows() {
        for (v, b) in h.row_mut(i).iter_mut().zip(&biases) {
            *v = config.activation.apply(*v + b);
        }
    }
    let beta = pinv_solve(&h, &pair.response, config.lambda)?;
    if !beta.is_finite() {
        return Err(Error::NonFinite("elm output weights"));
    }
    Ok(ElmModel {
        geometry: seq.geometry(),
        input_weights,
        biases,
        activation: config.activation,
        beta,
        temporal_mean: centered.temporal_mean().to_vec(),
        rng_seed: config.rng_seed,
        lambda: config.lambda,
    })
}

impl ElmModel {
    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn hidden_nodes(&self) -> usize {
        self.biases.len()
    }

    pub fn input_weights(&self) -> &DenseMatrix {
        &self.input_weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn beta(&self) -> &DenseMatrix {
        &self.beta
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn temporal_mean(&self) -> &[f64] {
        &self.temporal_mean
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Hidden-layer response `h(x)` for a centered input.
    pub fn hidden(&self, centered: &[f64]) -> Vec<f64> {
        (0..self.hidden_nodes())
            .into_par_iter()
            .map(|t| {
                self.activation
                    .apply(dot(self.input_weights.row(t), centered) + self.biases[t])
            })
            .collect()
    }

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
        Ok(weighted_row_sum(&self.hidden(centered), &self.beta))
    }

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

    pub fn synthesize(&self, seed: &Frame, count: usize) -> Result<FrameSequence> {
        rollout(self.geometry, seed, count, |f| self.predict_next(f))
    }

    /// `‖Hβ − Y‖_F / ‖Y‖_F` on consecutive pairs of `seq`, centered with the stored mean.
    pub fn fit_residual(&self, seq: &FrameSequence) -> Result<f64> {
        check_geometry(self.geometry, seq.geometry())?;
        let mut num = 0.0;
        let mut den = 0.0;
        for w in seq.frames().windows(2) {
            let x: Vec<f64> = w[0]
                .data()
                .iter()
                .zip(&self.temporal_mean)
                .map(|(v, m)| v - m)
                .collect();
            let pred = self.predict_centered(&x)?;
            for ((p, v), m) in pred.iter().zip(w[1].data()).zip(&self.temporal_mean) {
                let y = v - m;
                num += (p - y) * (p - y);
                den += y * y;
            }
        }
        Ok((num / den).sqrt())
    }

    pub fn save(&self, path: &Path) -> Result<usize> {
        let mut w = Writer::new(ELM_MAGIC);
        w.geometry(self.geometry);
        w.u32(self.hidden_nodes() as u32);
        w.u32(self.geometry.dim() as u32);
        w.f64(self.lambda);
        w.u64(self.rng_seed);
        w.text(&self.activation.to_string());
        w.f64s(&self.temporal_mean);
        w.f64s(self.input_weights.as_slice());
        w.f64s(&self.biases);
        w.f64s(self.beta.as_slice());
        w.finish(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&codec::read_file(path)?)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::open(bytes, ELM_MAGIC)?;
        let geometry = r.geometry()?;
        let t = r.u32("hidden nodes")? as usize;
        let dim = r.u32("dim")? as usize;
        codec::check_dim(geometry, dim)?;
        if t == 0 {
            return Err(Error::Corrupt("model has no hidden nodes".into()));
        }
        let lambda = r.f64("lambda")?;
        let rng_seed = r.u64("rng seed")?;
        let activation: Activation = r
            .text("activation")?
            .parse()
            .map_err(|e: Error| Error::Corrupt(e.to_string()))?;
        let temporal_mean = r.f64s(dim, "temporal mean")?;
        let input_weights = r.matrix(t, dim, "input weights")?;
        let biases = r.f64s(t, "biases")?;
        let beta = r.matrix(t, dim, "output weights")?;
        r.finish()?;

        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Corrupt(format!("invalid lambda {lambda}")));
        }
        codec::ensure_finite(&temporal_mean, "temporal mean")?;
        codec::ensure_finite(input_weights.as_slice(), "input weights")?;
        codec::ensure_finite(&biases, "biases")?;
        codec::ensure_finite(beta.as_slice(), "output weights")?;
        Ok(Self {
            geometry,
            input_weights,
            biases,
            activation,
            beta,
            temporal_mean,
            rng_seed,
            lambda,
        })
    }
}
