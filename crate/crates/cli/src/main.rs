mod commands;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use dyntex_core::harness::Pattern;
use dyntex_core::{Activation, ErrorClass, ImageFormat, KernelConfig, LoadOptions};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Dynamic texture synthesis by kernel similarity embedding.
///
/// Results go to standard output (JSON) or to the requested files; progress
/// messages go to standard error. Set DYNTEX_THREADS to cap worker threads
/// (0 or unset = all cores).
///
/// Exit status: 0 success, 1 usage error, 2 data error, 3 numerical failure.
#[derive(Debug, Parser)]
#[command(name = "dyntex", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a KSE model on a directory of frames and write a KSE1 model file.
    Train(TrainArgs),
    /// Roll a trained model (KSE1, ELM1 or LDS1) forward and write frames.
    Synthesize(SynthesizeArgs),
    /// Compare generated frames with observed frames (PSNR and SSIM).
    Evaluate(EvaluateArgs),
    /// Sweep lambda and gamma for a gaussian kernel and score each cell.
    Gridsearch(GridArgs),
    /// Train a baseline model.
    #[command(subcommand)]
    Baseline(BaselineCommand),
    /// Time training and synthesis.
    Bench(BenchArgs),
    /// Export the Gram matrix of a sequence as CSV and a grayscale PGM.
    Heatmap(HeatmapArgs),
    /// Write a synthetic test texture.
    Synthetic(SyntheticArgs),
    /// Synthesize a long sequence and score it against observed footage with checkpoints.
    Sustain(SustainArgs),
}

#[derive(Debug, Subcommand)]
pub enum BaselineCommand {
    /// Linear dynamical system: SVD observation map plus linear state transition.
    Lds(LdsArgs),
    /// Extreme learning machine with a random hidden layer.
    Elm(ElmArgs),
}

/// Frame loading options shared by every command that reads a directory.
#[derive(Debug, Clone, Args)]
pub struct LoadArgs {
    /// Convert frames to grayscale (luma) while loading.
    #[arg(long)]
    pub gray: bool,
    /// Resize every frame to WxH with bilinear interpolation [default: no resize].
    #[arg(long, value_name = "WxH", value_parser = parse_size)]
    pub resize: Option<(usize, usize)>,
    /// Use only the first N frames in file-name order [default: all frames].
    #[arg(long, value_name = "N")]
    pub max_frames: Option<usize>,
}

impl LoadArgs {
    pub fn options(&self) -> LoadOptions {
        LoadOptions {
            grayscale: self.gray,
            resize: self.resize,
            max_frames: self.max_frames,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    /// Kernel as family:key=value,... (gaussian, linear, polynomial,
    /// rational_quadratic, multiquadric, sigmoid). gamma=auto uses the median
    /// squared distance between training frames.
    #[arg(long, default_value = "gaussian:gamma=auto", value_parser = KernelConfig::from_str)]
    pub kernel: KernelConfig,
    /// Ridge factor added to the Gram diagonal.
    #[arg(long, default_value = "1e-10")]
    pub lambda: f64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Directory of input frames.
    #[arg(long, value_name = "DIR")]
    pub frames: PathBuf,
    /// Output model file.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub load: LoadArgs,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    /// Model file (KSE1, ELM1 or LDS1).
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Number of frames to write, seed included.
    #[arg(long, value_name = "L")]
    pub count: usize,
    /// Seed image [default: training frame 1 for KSE models; ELM models need a
    /// seed; LDS models start from their stored initial state and take no seed].
    #[arg(long, value_name = "IMG", conflicts_with_all = ["seed_index", "seed_frames"])]
    pub seed: Option<PathBuf>,
    /// 1-based seed frame index into --seed-frames, or into the model's own
    /// training frames when --seed-frames is absent [default: 1].
    #[arg(long, value_name = "K")]
    pub seed_index: Option<usize>,
    /// Directory whose frames provide the seed (see --seed-index).
    #[arg(long, value_name = "DIR")]
    pub seed_frames: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Output image format: png or pgm.
    #[arg(long, default_value = "png", value_parser = ImageFormat::from_str)]
    pub format: ImageFormat,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Directory of observed frames.
    #[arg(long, value_name = "DIR")]
    pub observed: PathBuf,
    /// Directory of generated frames.
    #[arg(long, value_name = "DIR")]
    pub generated: PathBuf,
    /// Write per-frame scores and a final mean row to this CSV file [default: none].
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub load: LoadArgs,
}

/// A gamma grid value: a number, or `auto` for the median heuristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaArg {
    Auto,
    Value(f64),
}

impl FromStr for GammaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(GammaArg::Auto);
        }
        s.parse::<f64>()
            .map(GammaArg::Value)
            .map_err(|_| format!("expected a number or \"auto\", got {s:?}"))
    }
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Directory of observed frames.
    #[arg(long, value_name = "DIR")]
    pub frames: PathBuf,
    /// Comma-separated ridge factors.
    #[arg(long, value_delimiter = ',', default_value = "1e-10,1e-6,1e-2,1e2")]
    pub lambdas: Vec<f64>,
    /// Comma-separated gaussian bandwidths; `auto` is the median heuristic on the training prefix.
    #[arg(long, value_delimiter = ',', default_value = "auto")]
    pub gammas: Vec<GammaArg>,
    /// Training prefix length [default: loaded frames minus --eval].
    #[arg(long, value_name = "N")]
    pub train: Option<usize>,
    /// Frames scored beyond the training prefix [default: a quarter of the loaded frames].
    #[arg(long, value_name = "N")]
    pub eval: Option<usize>,
    /// Also write the grid as CSV [default: none].
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub load: LoadArgs,
}

#[derive(Debug, Args)]
pub struct LdsArgs {
    /// Directory of training frames.
    #[arg(long, value_name = "DIR")]
    pub frames: PathBuf,
    /// Output model file.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Hidden state dimension.
    #[arg(long, default_value_t = 30)]
    pub state_dim: usize,
    #[command(flatten)]
    pub load: LoadArgs,
}

#[derive(Debug, Args)]
pub struct ElmArgs {
    /// Directory of training frames.
    #[arg(long, value_name = "DIR")]
    pub frames: PathBuf,
    /// Output model file.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Number of hidden nodes.
    #[arg(long, default_value_t = 500)]
    pub hidden: usize,
    /// Ridge factor for the output weights (must be > 0).
    #[arg(long, default_value = "1e-6")]
    pub lambda: f64,
    /// Seed for the random hidden layer.
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    /// Hidden activation: sigmoid or tanh.
    #[arg(long, default_value = "sigmoid", value_parser = Activation::from_str)]
    pub activation: Activation,
    #[command(flatten)]
    pub load: LoadArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory of training frames.
    #[arg(long, value_name = "DIR")]
    pub frames: PathBuf,
    /// Frames to synthesize for the rate measurement.
    #[arg(long, default_value_t = 1200)]
    pub count: usize,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub load: LoadArgs,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    /// Directory of frames.
    #[arg(long, value_name = "DIR")]
    pub frames: PathBuf,
    /// Kernel for the Gram matrix (same grammar as `train --kernel`).
    #[arg(long, default_value = "gaussian:gamma=auto", value_parser = KernelConfig::from_str)]
    pub kernel: KernelConfig,
    /// Output CSV of Gram values.
    #[arg(long, value_name = "FILE")]
    pub csv: PathBuf,
    /// Output PGM image, min-max scaled to 0..255.
    #[arg(long, value_name = "FILE")]
    pub pgm: PathBuf,
    #[command(flatten)]
    pub load: LoadArgs,
}

#[derive(Debug, Args)]
pub struct SyntheticArgs {
    /// translating_sine, rotating_phase or saturated_sine.
    #[arg(long, default_value = "translating_sine", value_parser = Pattern::from_str)]
    pub pattern: Pattern,
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    #[arg(long, default_value_t = 48)]
    pub height: usize,
    /// Temporal period in frames.
    #[arg(long, default_value_t = 20)]
    pub period: usize,
    /// Number of frames to write.
    #[arg(long, default_value_t = 60)]
    pub frames: usize,
    /// Amplitude of uniform additive noise.
    #[arg(long, default_value = "0")]
    pub noise: f64,
    /// Noise seed.
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Output image format: png or pgm.
    #[arg(long, default_value = "png", value_parser = ImageFormat::from_str)]
    pub format: ImageFormat,
}

#[derive(Debug, Args)]
pub struct SustainArgs {
    /// Directory of observed frames; the first --train frames train the model.
    #[arg(long, value_name = "DIR")]
    pub frames: PathBuf,
    /// Training prefix length [default: all loaded frames].
    #[arg(long, value_name = "N")]
    pub train: Option<usize>,
    /// Frames to synthesize, seed included.
    #[arg(long, default_value_t = 1000)]
    pub horizon: usize,
    /// Write the synthesized frames here [default: not written].
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Output image format: png or pgm.
    #[arg(long, default_value = "png", value_parser = ImageFormat::from_str)]
    pub format: ImageFormat,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub load: LoadArgs,
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<usize>().ok().filter(|&n| n > 0);
    match (parse(w), parse(h)) {
        (Some(w), Some(h)) => Ok((w, h)),
        _ => Err(format!("expected positive WxH, got {s:?}")),
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("DYNTEX_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("DYNTEX_THREADS must be a non-negative integer, got {raw:?}"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let class = err
        .chain()
        .find_map(|e| e.downcast_ref::<dyntex_core::Error>())
        .map(|e| e.class());
    match class {
        Some(ErrorClass::Numerical) => EXIT_NUMERICAL,
        _ => EXIT_DATA,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
