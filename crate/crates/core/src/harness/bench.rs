use std::time::Instant;

use serde::Serialize;

use crate::error::Result;
use crate::frameio::FrameSequence;
use crate::kernels::KernelConfig;
use crate::kse::train_with;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub frames: usize,
    pub dim: usize,
    pub gen_frames: usize,
    pub train_seconds: f64,
    pub synth_seconds: f64,
    /// `gen_frames / synth_seconds`, or 0 when `fps_defined` is false.
    pub fps: f64,
    pub fps_defined: bool,
}

/// Wall-clock training time on all of `seq` and rollout time for `gen_frames`
/// frames seeded from training frame 1.
pub fn run_bench(
    seq: &FrameSequence,
    kernel: &KernelConfig,
    lambda: f64,
    gen_frames: usize,
) -> Result<BenchReport> {
    let started = Instant::now();
    let model = train_with(seq, kernel, lambda)?;
    let train_seconds = started.elapsed().as_secs_f64();

    let (synth_seconds, fps, fps_defined) = if gen_frames == 0 {
        (0.0, 0.0, false)
    } else {
        let started = Instant::now();
        let out = model.synthesize_from(seq.frame(0), gen_frames)?;
        let secs = started.elapsed().as_secs_f64();
        debug_assert_eq!(out.len(), gen_frames);
        if secs > 0.0 {
            (secs, gen_frames as f64 / secs, true)
        } else {
            (secs, 0.0, false)
        }
    };
    Ok(BenchReport {
        frames: seq.len(),
        dim: seq.geometry().dim(),
        gen_frames,
        train_seconds,
        synth_seconds,
        fps,
        fps_defined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::synthetic::{make_synthetic, SyntheticSpec};

    #[test]
    fn zero_generated_frames_flags_fps() {
        let spec = SyntheticSpec {
            width: 8,
            height: 8,
            ..SyntheticSpec::default()
        };
        let seq = make_synthetic(&spec).unwrap();
        let r = run_bench(&seq, &KernelConfig::gaussian_auto(), 1e-8, 0).unwrap();
        assert_eq!(r.synth_seconds, 0.0);
        assert_eq!(r.fps, 0.0);
        assert!(!r.fps_defined);
        let r = run_bench(&seq, &KernelConfig::gaussian_auto(), 1e-8, 50).unwrap();
        assert!(r.fps_defined && r.fps > 0.0);
    }
}
