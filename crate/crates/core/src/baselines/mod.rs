//! Comparison models: a random-feature ELM regressor and an SVD-based linear
//! dynamical system.

mod elm;
mod lds;

pub use elm::{elm_train, Activation, ElmConfig, ElmModel, ELM_MAGIC};
pub use lds::{lds_train, LdsModel, LDS_MAGIC};

/// Default LDS state dimension.
pub const DEFAULT_LDS_STATE_DIM: usize = 30;
