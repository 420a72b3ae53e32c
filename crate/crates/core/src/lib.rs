//! Dynamic texture synthesis by kernel ridge regression over consecutive frames.
//!
//! A [`KseModel`] learns the map from each centered frame to the next using
//! the Gram matrix of the training frames, then rolls that map forward from a
//! seed frame. Linear dynamical system and extreme learning machine baselines,
//! PSNR/SSIM metrics and experiment drivers live alongside it.

pub mod baselines;
mod codec;
pub mod error;
pub mod frameio;
pub mod harness;
pub mod kernels;
pub mod kse;
pub mod metrics;
pub mod solver;

use std::path::Path;

pub use baselines::{elm_train, lds_train, Activation, ElmConfig, ElmModel, LdsModel};
pub use error::{Error, ErrorClass, Result};
pub use frameio::{
    load_sequence, save_sequence, Frame, FrameSequence, Geometry, ImageFormat, LoadOptions,
};
pub use kernels::{gram_matrix, GramMatrix, KernelConfig, KernelFamily, KernelSpec};
pub use kse::{train, train_with, KseModel, SynthesisRequest};
pub use metrics::{evaluate, EvalConfig, MetricReport};
pub use solver::DenseMatrix;

/// Any of the three model file kinds, chosen by the file's magic bytes.
#[derive(Debug, Clone)]
pub enum AnyModel {
    Kse(KseModel),
    Elm(ElmModel),
    Lds(LdsModel),
}

impl AnyModel {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = codec::read_file(path)?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        match bytes.get(..4) {
            Some(m) if m == kse::KSE_MAGIC => KseModel::from_bytes(bytes).map(AnyModel::Kse),
            Some(m) if m == baselines::ELM_MAGIC => ElmModel::from_bytes(bytes).map(AnyModel::Elm),
            Some(m) if m == baselines::LDS_MAGIC => LdsModel::from_bytes(bytes).map(AnyModel::Lds),
            Some(m) => Err(Error::BadMagic {
                expected: "KSE1|ELM1|LDS1".into(),
                found: String::from_utf8_lossy(m).into_owned(),
            }),
            None => Err(Error::Truncated("magic")),
        }
    }

    pub fn geometry(&self) -> Geometry {
        match self {
            AnyModel::Kse(m) => m.geometry(),
            AnyModel::Elm(m) => m.geometry(),
            AnyModel::Lds(m) => m.geometry(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AnyModel::Kse(_) => "kse",
            AnyModel::Elm(_) => "elm",
            AnyModel::Lds(_) => "lds",
        }
    }
}
