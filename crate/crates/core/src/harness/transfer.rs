use rayon::prelude::*;

use crate::error::Result;
use crate::frameio::{check_geometry, Frame, FrameSequence};
use crate::kse::KseModel;
use crate::metrics::{evaluate, EvalConfig, MetricReport};

/// A starting frame plus, optionally, the footage that actually followed it.
#[derive(Debug, Clone)]
pub struct TransferSeed {
    pub frame: Frame,
    /// Observed sequence whose frame 1 is `frame`.
    pub observed: Option<FrameSequence>,
}

impl TransferSeed {
    pub fn new(frame: Frame) -> Self {
        Self {
            frame,
            observed: None,
        }
    }

    /// Seed from frame 1 of `observed`, scored against the rest of it.
    pub fn with_observed(observed: FrameSequence) -> Self {
        Self {
            frame: observed.frame(0).clone(),
            observed: Some(observed),
        }
    }
}

#[derive(Debug, Clone)]
pub enum TransferCell {
    Ok {
        generated: FrameSequence,
        report: Option<MetricReport>,
    },
    Failed {
        reason: String,
    },
}

impl TransferCell {
    pub fn is_ok(&self) -> bool {
        matches!(self, TransferCell::Ok { .. })
    }

    pub fn report(&self) -> Option<&MetricReport> {
        match self {
            TransferCell::Ok { report, .. } => report.as_ref(),
            TransferCell::Failed { .. } => None,
        }
    }
}

/// `cells[i][j]` drives model `i` from seed `j`.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    pub cells: Vec<Vec<TransferCell>>,
}

impl TransferMatrix {
    pub fn cell(&self, model: usize, seed: usize) -> &TransferCell {
        &self.cells[model][seed]
    }
}

fn run_one(model: &KseModel, seed: &TransferSeed, count: usize, eval: &EvalConfig) -> Result<TransferCell> {
    check_geometry(model.geometry(), seed.frame.geometry())?;
    let generated = model.synthesize_from(&seed.frame, count)?;
    let report = match &seed.observed {
        Some(obs) if obs.len().min(count) >= eval.psnr.start_index => {
            Some(evaluate(obs, &generated, eval)?)
        }
        _ => None,
    };
    Ok(TransferCell::Ok { generated, report })
}

/// Every model against every seed. A failing cell records its reason and the
/// remaining cells still run.
pub fn run_transfer(models: &[KseModel], seeds: &[TransferSeed], count: usize) -> TransferMatrix {
    let eval = EvalConfig::default();
    let cells = models
        .par_iter()
        .map(|m| {
            seeds
                .iter()
                .map(|s| {
                    run_one(m, s, count, &eval).unwrap_or_else(|e| TransferCell::Failed {
                        reason: e.to_string(),
                    })
                })
                .collect()
        })
        .collect();
    TransferMatrix { cells }
}
