//! Fixtures shared by the criterion benchmarks.

use dyntex_core::harness::{make_synthetic, Pattern, SyntheticSpec};
use dyntex_core::{train_with, FrameSequence, KernelConfig, KseModel};

/// Noisy translating grating of `frames` frames at `width × height`.
pub fn texture(width: usize, height: usize, frames: usize) -> FrameSequence {
    make_synthetic(&SyntheticSpec {
        pattern: Pattern::TranslatingSine,
        width,
        height,
        period: 20,
        frames,
        noise_amp: 5.0,
        rng_seed: 7,
    })
    .expect("fixture spec is valid")
}

/// Gaussian auto-bandwidth model with a small ridge, trained on `seq`.
pub fn trained(seq: &FrameSequence) -> KseModel {
    train_with(seq, &KernelConfig::gaussian_auto(), 1e-10).expect("fixture trains")
}
