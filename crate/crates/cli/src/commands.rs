use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use dyntex_core::frameio::load_frame;
use dyntex_core::harness::{
    auto_gamma, export_gram_heatmap, gram_band_period, make_synthetic, run_bench, run_grid,
    run_sustainability, GridSpec, SyntheticSpec,
};
use dyntex_core::{
    elm_train, evaluate, lds_train, load_sequence, save_sequence, train_with, AnyModel, ElmConfig,
    EvalConfig, Frame, FrameSequence, LoadOptions,
};
use serde::Serialize;
use serde_json::json;

use crate::{
    BaselineCommand, BenchArgs, Command, ElmArgs, EvaluateArgs, GammaArg, GridArgs, HeatmapArgs,
    LdsArgs, SustainArgs, SynthesizeArgs, SyntheticArgs, TrainArgs,
};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Train(a) => train(a),
        Command::Synthesize(a) => synthesize(a),
        Command::Evaluate(a) => evaluate_dirs(a),
        Command::Gridsearch(a) => gridsearch(a),
        Command::Baseline(BaselineCommand::Lds(a)) => baseline_lds(a),
        Command::Baseline(BaselineCommand::Elm(a)) => baseline_elm(a),
        Command::Bench(a) => bench(a),
        Command::Heatmap(a) => heatmap(a),
        Command::Synthetic(a) => synthetic(a),
        Command::Sustain(a) => sustain(a),
    }
}

fn emit(value: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn load(dir: &Path, options: &LoadOptions) -> Result<FrameSequence> {
    let seq = load_sequence(dir, options)
        .with_context(|| format!("loading frames from {}", dir.display()))?;
    let g = seq.geometry();
    eprintln!(
        "loaded {} frames ({}x{}x{}) from {}",
        seq.len(),
        g.width,
        g.height,
        g.channels,
        dir.display()
    );
    Ok(seq)
}

fn write_frames(seq: &FrameSequence, dir: &Path, format: dyntex_core::ImageFormat) -> Result<usize> {
    let n = save_sequence(seq, dir, format)
        .with_context(|| format!("writing frames to {}", dir.display()))?;
    eprintln!("wrote {n} frames to {}", dir.display());
    Ok(n)
}

fn train(a: TrainArgs) -> Result<()> {
    let seq = load(&a.frames, &a.load.options())?;
    eprintln!("training {} with lambda {:e}", a.kernel.kernel, a.kernel.lambda);
    let started = Instant::now();
    let model = train_with(&seq, &a.kernel.kernel, a.kernel.lambda).context("training")?;
    let train_seconds = started.elapsed().as_secs_f64();
    let bytes = model
        .save(&a.out)
        .with_context(|| format!("writing {}", a.out.display()))?;
    emit(&json!({
        "model": a.out,
        "frames": seq.len(),
        "dim": seq.geometry().dim(),
        "lambda": model.lambda(),
        "kernel": model.kernel().to_string(),
        "jitter": model.jitter_applied(),
        "train_seconds": train_seconds,
        "bytes": bytes,
    }))
}

/// Picks the 1-based `index` from a sequence.
fn pick(seq: &FrameSequence, index: usize) -> Result<Frame> {
    if index == 0 || index > seq.len() {
        bail!(dyntex_core::Error::InvalidParameter(format!(
            "seed index {index} outside 1..={}",
            seq.len()
        )));
    }
    Ok(seq.frame(index - 1).clone())
}

fn resolve_seed(a: &SynthesizeArgs, model: &AnyModel) -> Result<Option<Frame>> {
    let options = LoadOptions {
        grayscale: model.geometry().channels == 1,
        ..LoadOptions::default()
    };
    if let Some(path) = &a.seed {
        let frame = load_frame(path, &options)
            .with_context(|| format!("loading seed {}", path.display()))?;
        return Ok(Some(frame));
    }
    let index = a.seed_index.unwrap_or(1);
    if let Some(dir) = &a.seed_frames {
        return pick(&load(dir, &options)?, index).map(Some);
    }
    match model {
        AnyModel::Kse(m) => {
            if index == 0 || index > m.training_len() {
                bail!(dyntex_core::Error::InvalidParameter(format!(
                    "seed index {index} outside the model's training frames 1..={}",
                    m.training_len()
                )));
            }
            Ok(Some(m.training_frame(index - 1)?))
        }
        AnyModel::Elm(_) => bail!(dyntex_core::Error::InvalidParameter(
            "ELM models store no training frames; pass --seed or --seed-frames".into()
        )),
        AnyModel::Lds(_) => Ok(None),
    }
}

fn synthesize(a: SynthesizeArgs) -> Result<()> {
    let model = AnyModel::load(&a.model).with_context(|| format!("loading {}", a.model.display()))?;
    let seeded = a.seed.is_some() || a.seed_frames.is_some() || a.seed_index.is_some();
    if matches!(model, AnyModel::Lds(_)) && seeded {
        bail!(dyntex_core::Error::InvalidParameter(
            "LDS models roll out from their stored initial state and take no seed".into()
        ));
    }
    let seed = resolve_seed(&a, &model)?;
    eprintln!("synthesizing {} frames with a {} model", a.count, model.kind());
    let started = Instant::now();
    let out = match (&model, seed) {
        (AnyModel::Kse(m), Some(seed)) => m.synthesize_from(&seed, a.count),
        (AnyModel::Elm(m), Some(seed)) => m.synthesize(&seed, a.count),
        (AnyModel::Lds(m), _) => m.synthesize(a.count),
        (_, None) => unreachable!("seed resolution covers KSE and ELM"),
    }
    .context("synthesis")?;
    let seconds = started.elapsed().as_secs_f64();
    write_frames(&out, &a.out, a.format)?;
    emit(&json!({
        "model": model.kind(),
        "frames": out.len(),
        "seconds": seconds,
        "fps": if seconds > 0.0 { Some(out.len() as f64 / seconds) } else { None },
        "out": a.out,
    }))
}

fn evaluate_dirs(a: EvaluateArgs) -> Result<()> {
    let options = a.load.options();
    let observed = load(&a.observed, &options)?;
    let generated = load(&a.generated, &options)?;
    let report = evaluate(&observed, &generated, &EvalConfig::default()).context("evaluation")?;
    if let Some(path) = &a.csv {
        report
            .write_csv(path)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    emit(&report)
}

fn gridsearch(a: GridArgs) -> Result<()> {
    let seq = load(&a.frames, &a.load.options())?;
    let eval = a.eval.unwrap_or(seq.len() / 4);
    let train = match a.train {
        Some(t) => t,
        None => seq.len().checked_sub(eval).unwrap_or(0),
    };
    let auto = if a.gammas.contains(&GammaArg::Auto) {
        Some(auto_gamma(&seq, train).context("resolving gamma=auto")?)
    } else {
        None
    };
    let gammas = a
        .gammas
        .iter()
        .map(|g| match g {
            GammaArg::Auto => auto.expect("resolved above"),
            GammaArg::Value(v) => *v,
        })
        .collect();
    let grid = GridSpec::new(a.lambdas.clone(), gammas)?;
    eprintln!(
        "grid of {} cells, training on {train} frames and scoring {eval} more",
        grid.cells()
    );
    let result = run_grid(&seq, &grid, train, eval).context("grid search")?;
    if let Some(path) = &a.csv {
        result
            .write_csv(path)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    emit(&json!({ "auto_gamma": auto, "result": result }))
}

fn baseline_lds(a: LdsArgs) -> Result<()> {
    let seq = load(&a.frames, &a.load.options())?;
    let model = lds_train(&seq, a.state_dim).context("training LDS")?;
    let bytes = model
        .save(&a.out)
        .with_context(|| format!("writing {}", a.out.display()))?;
    emit(&json!({ "model": a.out, "state_dim": a.state_dim, "frames": seq.len(), "bytes": bytes }))
}

fn baseline_elm(a: ElmArgs) -> Result<()> {
    let seq = load(&a.frames, &a.load.options())?;
    let cfg = ElmConfig {
        hidden_nodes: a.hidden,
        lambda: a.lambda,
        rng_seed: a.rng_seed,
        activation: a.activation,
    };
    let model = elm_train(&seq, &cfg).context("training ELM")?;
    let residual = model.fit_residual(&seq)?;
    let bytes = model
        .save(&a.out)
        .with_context(|| format!("writing {}", a.out.display()))?;
    emit(&json!({
        "model": a.out,
        "config": cfg,
        "frames": seq.len(),
        "fit_residual": residual,
        "bytes": bytes,
    }))
}

fn bench(a: BenchArgs) -> Result<()> {
    let seq = load(&a.frames, &a.load.options())?;
    let report = run_bench(&seq, &a.kernel.kernel, a.kernel.lambda, a.count).context("benchmark")?;
    eprintln!(
        "train {:.3} s, synthesis {:.1} fps",
        report.train_seconds, report.fps
    );
    emit(&report)
}

fn heatmap(a: HeatmapArgs) -> Result<()> {
    let seq = load(&a.frames, &a.load.options())?;
    let gram = export_gram_heatmap(&seq, &a.kernel, &a.csv, &a.pgm).context("heatmap export")?;
    emit(&json!({
        "n": gram.n(),
        "csv": a.csv,
        "pgm": a.pgm,
        "period": gram_band_period(&gram),
    }))
}

fn synthetic(a: SyntheticArgs) -> Result<()> {
    let spec = SyntheticSpec {
        pattern: a.pattern,
        width: a.width,
        height: a.height,
        period: a.period,
        frames: a.frames,
        noise_amp: a.noise,
        rng_seed: a.rng_seed,
    };
    let seq = make_synthetic(&spec)?;
    write_frames(&seq, &a.out, a.format)?;
    emit(&json!({ "spec": spec, "out": a.out }))
}

fn sustain(a: SustainArgs) -> Result<()> {
    let seq = load(&a.frames, &a.load.options())?;
    let train = a.train.unwrap_or(seq.len());
    eprintln!("training on {train} frames, synthesizing {}", a.horizon);
    let run = run_sustainability(&seq, &a.kernel.kernel, a.kernel.lambda, train, a.horizon)
        .context("sustainability run")?;
    if let Some(dir) = &a.out {
        write_frames(&run.generated, dir, a.format)?;
    }
    emit(&run.summary)
}
