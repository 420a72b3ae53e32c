use serde::Serialize;

use crate::error::{Error, Result};
use crate::frameio::FrameSequence;
use crate::kernels::KernelConfig;
use crate::kse::train_with;
use crate::metrics::{evaluate, EvalConfig, MetricReport};

/// Spacing of the decay checkpoints, in frames.
pub const CHECKPOINT_INTERVAL: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Checkpoint {
    /// 1-based frame index.
    pub frame: usize,
    /// `None` when no observed frame exists at this index.
    pub ssim: Option<f64>,
    pub psnr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SustainabilitySummary {
    pub train_frames: usize,
    pub horizon: usize,
    pub observed_frames: usize,
    /// Metrics over frames `2..=min(horizon, observed)`, absent if that range is empty.
    pub report: Option<MetricReport>,
    pub checkpoints: Vec<Checkpoint>,
}

impl SustainabilitySummary {
    /// `(min, max)` SSIM over the scored checkpoints.
    pub fn checkpoint_ssim_range(&self) -> Option<(f64, f64)> {
        let scored: Vec<f64> = self.checkpoints.iter().filter_map(|c| c.ssim).collect();
        if scored.is_empty() {
            return None;
        }
        let min = scored.iter().copied().fold(f64::INFINITY, f64::min);
        let max = scored.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some((min, max))
    }
}

#[derive(Debug, Clone)]
pub struct SustainabilityRun {
    pub summary: SustainabilitySummary,
    pub generated: FrameSequence,
}

/// Train on the first `train_frames` of `observed`, roll out `horizon` frames
/// from training frame 1 and score whatever part of the rollout has an
/// observed counterpart.
pub fn run_sustainability(
    observed: &FrameSequence,
    kernel: &KernelConfig,
    lambda: f64,
    train_frames: usize,
    horizon: usize,
) -> Result<SustainabilityRun> {
    run_sustainability_with(
        observed,
        kernel,
        lambda,
        train_frames,
        horizon,
        &EvalConfig::default(),
    )
}

pub fn run_sustainability_with(
    observed: &FrameSequence,
    kernel: &KernelConfig,
    lambda: f64,
    train_frames: usize,
    horizon: usize,
    eval: &EvalConfig,
) -> Result<SustainabilityRun> {
    if train_frames < 2 || train_frames > observed.len() {
        return Err(Error::InsufficientFrames {
            needed: train_frames.max(2),
            available: observed.len(),
        });
    }
    if horizon < train_frames {
        return Err(Error::InvalidParameter(format!(
            "horizon ({horizon}) must be >= train frames ({train_frames})"
        )));
    }
    let model = train_with(&observed.truncated(train_frames), kernel, lambda)?;
    let generated = model.synthesize_from(observed.frame(0), horizon)?;

    let compared_end = horizon.min(observed.len());
    let report = if compared_end >= eval.psnr.start_index {
        Some(evaluate(observed, &generated, eval)?)
    } else {
        None
    };
    let checkpoints = (1..=horizon / CHECKPOINT_INTERVAL)
        .map(|k| {
            let frame = k * CHECKPOINT_INTERVAL;
            let idx = report
                .as_ref()
                .filter(|r| frame >= r.start_index && frame < r.start_index + r.frames_compared)
                .map(|r| (r, frame - r.start_index));
            Checkpoint {
                frame,
                ssim: idx.map(|(r, i)| r.per_frame_ssim[i]),
                psnr: idx.map(|(r, i)| r.per_frame_psnr[i]),
            }
        })
        .collect();

    Ok(SustainabilityRun {
        summary: SustainabilitySummary {
            train_frames,
            horizon,
            observed_frames: observed.len(),
            report,
            checkpoints,
        },
        generated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::synthetic::{make_synthetic, SyntheticSpec};

    #[test]
    fn checkpoints_past_observation_are_unscored() {
        let spec = SyntheticSpec {
            width: 16,
            height: 12,
            frames: 150,
            ..SyntheticSpec::default()
        };
        let seq = make_synthetic(&spec).unwrap();
        let run = run_sustainability(&seq, &KernelConfig::gaussian_auto(), 1e-8, 40, 250).unwrap();
        assert_eq!(run.generated.len(), 250);
        let cps = &run.summary.checkpoints;
        assert_eq!(cps.len(), 2);
        assert!(cps[0].ssim.is_some());
        assert!(cps[1].ssim.is_none() && cps[1].psnr.is_none());
        assert_eq!(run.summary.report.as_ref().unwrap().frames_compared, 149);
    }

    #[test]
    fn horizon_bounds() {
        let spec = SyntheticSpec {
            width: 16,
            height: 12,
            ..SyntheticSpec::default()
        };
        let seq = make_synthetic(&spec).unwrap();
        let k = KernelConfig::gaussian_auto();
        assert!(run_sustainability(&seq, &k, 1e-8, 30, 20).is_err());
        assert!(run_sustainability(&seq, &k, 1e-8, 61, 100).is_err());
    }
}
