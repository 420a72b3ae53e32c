//! Experiment drivers: grid search, kernel comparison, long rollouts,
//! cross-sequence transfer, timing, Gram heatmaps and synthetic textures.

mod bench;
mod grid;
mod heatmap;
mod sustain;
mod synthetic;
mod transfer;

pub use bench::{run_bench, BenchReport};
pub use grid::{
    argmax_entry, auto_gamma, run_grid, run_grid_with, run_kernel_comparison,
    score_model_on_prefix, GridEntry, GridResult, GridSpec, KernelComparisonEntry,
};
pub use heatmap::{
    dominant_period, export_gram_heatmap, gram_band_period, gram_csv, heatmap_pixels,
    read_gram_csv, row_autocorrelation, sequence_gram,
};
pub use sustain::{
    run_sustainability, run_sustainability_with, Checkpoint, SustainabilityRun,
    SustainabilitySummary, CHECKPOINT_INTERVAL,
};
pub use synthetic::{make_synthetic, Pattern, SyntheticSpec, SyntheticTexture};
pub use transfer::{run_transfer, TransferCell, TransferMatrix, TransferSeed};
