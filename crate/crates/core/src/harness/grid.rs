use std::cmp::Ordering;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frameio::{center, make_training_pair, FrameSequence};
use crate::kernels::{median_bandwidth, KernelConfig, KernelSpec};
use crate::kse::train_with;
use crate::metrics::{evaluate, EvalConfig, MetricReport};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub lambdas: Vec<f64>,
    pub gammas: Vec<f64>,
}

impl GridSpec {
    pub fn new(lambdas: Vec<f64>, gammas: Vec<f64>) -> Result<Self> {
        let g = Self { lambdas, gammas };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, list) in [("lambda", &self.lambdas), ("gamma", &self.gammas)] {
            if list.is_empty() {
                return Err(Error::InvalidParameter(format!("{name} grid is empty")));
            }
            if let Some(bad) = list.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return Err(Error::InvalidParameter(format!(
                    "{name} grid values must be finite and > 0, got {bad}"
                )));
            }
        }
        Ok(())
    }

    /// `base^e` for each exponent, e.g. base 2 with exponents −30..=10.
    pub fn powers(base: f64, exponents: impl IntoIterator<Item = i32>) -> Vec<f64> {
        exponents.into_iter().map(|e| base.powi(e)).collect()
    }

    pub fn cells(&self) -> usize {
        self.lambdas.len() * self.gammas.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridEntry {
    pub lambda: f64,
    pub gamma: f64,
    /// NaN when the cell failed.
    pub mean_psnr: f64,
    /// NaN when the cell failed.
    pub mean_ssim: f64,
    pub train_seconds: f64,
    pub error: Option<String>,
}

impl GridEntry {
    fn same_scores(&self, other: &Self) -> bool {
        self.lambda.to_bits() == other.lambda.to_bits()
            && self.gamma.to_bits() == other.gamma.to_bits()
            && self.mean_psnr.to_bits() == other.mean_psnr.to_bits()
            && self.mean_ssim.to_bits() == other.mean_ssim.to_bits()
            && self.error == other.error
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridResult {
    /// λ-major: all gammas for the first lambda, then the next lambda.
    pub entries: Vec<GridEntry>,
    /// `(lambda, gamma)`; `None` only when every cell failed.
    pub best_by_ssim: Option<(f64, f64)>,
    pub best_by_psnr: Option<(f64, f64)>,
    pub train_frames: usize,
    pub eval_frames: usize,
}

impl GridResult {
    /// Bitwise equality of everything except wall-clock timings.
    pub fn same_scores(&self, other: &Self) -> bool {
        self.entries.len() == other.entries.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.same_scores(b))
            && bits(self.best_by_ssim) == bits(other.best_by_ssim)
            && bits(self.best_by_psnr) == bits(other.best_by_psnr)
    }

    pub fn entry(&self, lambda: f64, gamma: f64) -> Option<&GridEntry> {
        self.entries
            .iter()
            .find(|e| e.lambda == lambda && e.gamma == gamma)
    }

    pub fn best_ssim_entry(&self) -> Option<&GridEntry> {
        self.best_by_ssim.and_then(|(l, g)| self.entry(l, g))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,gamma,mean_psnr,mean_ssim,train_seconds\n");
        for e in &self.entries {
            writeln!(
                out,
                "{:e},{:e},{},{},{:.6}",
                e.lambda, e.gamma, e.mean_psnr, e.mean_ssim, e.train_seconds
            )
            .unwrap();
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

fn bits(p: Option<(f64, f64)>) -> Option<(u64, u64)> {
    p.map(|(a, b)| (a.to_bits(), b.to_bits()))
}

/// Index of the best-scoring entry. NaN never wins; ties go to the smaller
/// lambda and then the smaller gamma.
pub fn argmax_entry(entries: &[GridEntry], score: impl Fn(&GridEntry) -> f64) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, e) in entries.iter().enumerate() {
        let s = score(e);
        if s.is_nan() {
            continue;
        }
        let better = match best {
            None => true,
            Some(b) => {
                let cur = &entries[b];
                match s.partial_cmp(&score(cur)).unwrap() {
                    Ordering::Greater => true,
                    Ordering::Less => false,
                    Ordering::Equal => {
                        (e.lambda, e.gamma).partial_cmp(&(cur.lambda, cur.gamma))
                            == Some(Ordering::Less)
                    }
                }
            }
        };
        if better {
            best = Some(i);
        }
    }
    best
}

fn check_frames(seq: &FrameSequence, train_frames: usize, eval_frames: usize) -> Result<()> {
    if train_frames < 2 || train_frames + eval_frames > seq.len() {
        return Err(Error::InsufficientFrames {
            needed: (train_frames + eval_frames).max(2),
            available: seq.len(),
        });
    }
    Ok(())
}

/// Train on the first `train_frames`, roll out `train_frames + eval_frames`
/// frames from training frame 1 and score against the observed prefix.
pub fn score_model_on_prefix(
    seq: &FrameSequence,
    kernel: &KernelConfig,
    lambda: f64,
    train_frames: usize,
    eval_frames: usize,
    eval: &EvalConfig,
) -> Result<(MetricReport, f64)> {
    check_frames(seq, train_frames, eval_frames)?;
    let started = Instant::now();
    let model = train_with(&seq.truncated(train_frames), kernel, lambda)?;
    let seconds = started.elapsed().as_secs_f64();
    let total = train_frames + eval_frames;
    let generated = model.synthesize_from(seq.frame(0), total)?;
    let report = evaluate(&seq.truncated(total), &generated, eval)?;
    Ok((report, seconds))
}

fn run_cell(
    seq: &FrameSequence,
    lambda: f64,
    gamma: f64,
    train_frames: usize,
    eval_frames: usize,
    eval: &EvalConfig,
) -> GridEntry {
    let outcome = KernelSpec::gaussian(gamma).and_then(|spec| {
        score_model_on_prefix(seq, &spec.into(), lambda, train_frames, eval_frames, eval)
    });
    match outcome {
        Ok((report, seconds)) => GridEntry {
            lambda,
            gamma,
            mean_psnr: report.mean_psnr,
            mean_ssim: report.mean_ssim,
            train_seconds: seconds,
            error: None,
        },
        Err(e) => GridEntry {
            lambda,
            gamma,
            mean_psnr: f64::NAN,
            mean_ssim: f64::NAN,
            train_seconds: 0.0,
            error: Some(e.to_string()),
        },
    }
}

/// Gaussian-kernel (λ, γ) sweep with default metric settings.
pub fn run_grid(
    seq: &FrameSequence,
    grid: &GridSpec,
    train_frames: usize,
    eval_frames: usize,
) -> Result<GridResult> {
    run_grid_with(seq, grid, train_frames, eval_frames, &EvalConfig::default())
}

/// Cells that fail to train or synthesize are kept with NaN scores and an
/// error message; they never win the argmax.
pub fn run_grid_with(
    seq: &FrameSequence,
    grid: &GridSpec,
    train_frames: usize,
    eval_frames: usize,
    eval: &EvalConfig,
) -> Result<GridResult> {
    grid.validate()?;
    check_frames(seq, train_frames, eval_frames)?;
    let pairs: Vec<(f64, f64)> = grid
        .lambdas
        .iter()
        .flat_map(|&l| grid.gammas.iter().map(move |&g| (l, g)))
        .collect();
    let entries: Vec<GridEntry> = pairs
        .par_iter()
        .map(|&(l, g)| run_cell(seq, l, g, train_frames, eval_frames, eval))
        .collect();
    let pick = |i: Option<usize>| i.map(|i| (entries[i].lambda, entries[i].gamma));
    let best_by_ssim = pick(argmax_entry(&entries, |e| e.mean_ssim));
    let best_by_psnr = pick(argmax_entry(&entries, |e| e.mean_psnr));
    Ok(GridResult {
        entries,
        best_by_ssim,
        best_by_psnr,
        train_frames,
        eval_frames,
    })
}

/// Median-heuristic bandwidth of the training prefix, the value `gamma=auto`
/// resolves to when training on the first `train_frames` frames.
pub fn auto_gamma(seq: &FrameSequence, train_frames: usize) -> Result<f64> {
    if train_frames < 2 || train_frames > seq.len() {
        return Err(Error::InsufficientFrames {
            needed: train_frames.max(2),
            available: seq.len(),
        });
    }
    let centered = center(&seq.truncated(train_frames))?;
    let pair = make_training_pair(&centered)?;
    median_bandwidth(&pair.explanatory)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelComparisonEntry {
    pub kernel: String,
    pub mean_psnr: f64,
    pub mean_ssim: f64,
    pub train_seconds: f64,
    pub error: Option<String>,
}

/// Same protocol as the grid, varying the kernel family at fixed λ.
pub fn run_kernel_comparison(
    seq: &FrameSequence,
    kernels: &[KernelConfig],
    lambda: f64,
    train_frames: usize,
    eval_frames: usize,
) -> Result<Vec<KernelComparisonEntry>> {
    check_frames(seq, train_frames, eval_frames)?;
    let eval = EvalConfig::default();
    Ok(kernels
        .par_iter()
        .map(|k| {
            match score_model_on_prefix(seq, k, lambda, train_frames, eval_frames, &eval) {
                Ok((r, s)) => KernelComparisonEntry {
                    kernel: k.to_string(),
                    mean_psnr: r.mean_psnr,
                    mean_ssim: r.mean_ssim,
                    train_seconds: s,
                    error: None,
                },
                Err(e) => KernelComparisonEntry {
                    kernel: k.to_string(),
                    mean_psnr: f64::NAN,
                    mean_ssim: f64::NAN,
                    train_seconds: 0.0,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}
