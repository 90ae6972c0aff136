use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use qgan_core::gan::{train, write_history_csv, GanConfig, HistoryEntry, QualityScore, RingDataset};
use qgan_core::quant::{fit_and_quantize, quant_report, QuantOptions};
use qgan_core::search::{
    classify_run, multi_precision_search, sensitivity_sweep, write_sweep_csv, ClassifierConfig,
    Evaluator, GanEvaluator, Repeated, RunClass, SweepMode,
};
use qgan_core::store::{
    export_histogram, read_weights, write_weights, HistogramSpec,
};
use qgan_core::Tensor;
use serde::Serialize;

use crate::{AnalyzeArgs, Cli, Command, GanArgs, QuantizeArgs, SearchArgs, SweepArgs, TrainArgs};

pub fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Quantize(args) => quantize(cli, args),
        Command::Analyze(args) => analyze(cli, args),
        Command::Train(args) => train_cmd(cli, args),
        Command::Search(args) => search(cli, args),
        Command::Sweep(args) => sweep(cli, args),
    }
}

fn emit<T: Serialize>(cli: &Cli, value: &T, text: impl FnOnce() -> String) -> Result<()> {
    let mut out = std::io::stdout().lock();
    if cli.json {
        serde_json::to_writer_pretty(&mut out, value)?;
        writeln!(out)?;
    } else {
        write!(out, "{}", text())?;
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

fn create_csv(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn out_dir(cli: &Cli) -> Result<&Path> {
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    Ok(&cli.out)
}

fn load(path: &Path) -> Result<Vec<Tensor>> {
    read_weights(path).with_context(|| format!("reading {}", path.display()))
}

#[derive(Serialize)]
struct TensorReport {
    name: String,
    shape: Vec<usize>,
    l2_error: f64,
    states_used: usize,
    alpha: f64,
    beta: f64,
    entropy: f64,
    extremum_mass: f64,
    em_iterations: Option<usize>,
    em_converged: Option<bool>,
}

#[derive(Serialize)]
struct QuantizeReport {
    scheme: String,
    bits: u32,
    tensors: Vec<TensorReport>,
}

fn quantize(cli: &Cli, args: &QuantizeArgs) -> Result<ExitCode> {
    let tensors = load(&args.input)?;
    let options = QuantOptions {
        epsilon: args.epsilon,
        saturation_delta: args.delta,
        ..QuantOptions::default()
    };
    let mut quantized = Vec::with_capacity(tensors.len());
    let mut reports = Vec::with_capacity(tensors.len());
    for t in &tensors {
        let fitted = fit_and_quantize(t, args.scheme, args.bits, &options)
            .with_context(|| format!("quantizing `{}`", t.name()))?;
        let usage = quant_report(&fitted.outcome, args.bits);
        reports.push(TensorReport {
            name: t.name().to_string(),
            shape: t.shape().to_vec(),
            l2_error: fitted.outcome.l2_error,
            states_used: fitted.outcome.states_used,
            alpha: fitted.params.alpha,
            beta: fitted.params.beta,
            entropy: usage.entropy,
            extremum_mass: usage.extremum_mass,
            em_iterations: fitted.trace.as_ref().map(|tr| tr.steps_taken),
            em_converged: fitted.trace.as_ref().map(|tr| tr.converged),
        });
        quantized.push(fitted.outcome.quantized);
    }
    write_weights(&args.output, &quantized).with_context(|| format!("writing {}", args.output.display()))?;
    let report = QuantizeReport { scheme: args.scheme.to_string(), bits: args.bits, tensors: reports };
    emit(cli, &report, || {
        let mut s = String::new();
        for r in &report.tensors {
            s += &format!(
                "{}: l2_error={} states_used={} alpha={} beta={}\n",
                r.name, r.l2_error, r.states_used, r.alpha, r.beta
            );
        }
        s
    })?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct TensorSummary {
    name: String,
    shape: Vec<usize>,
    len: usize,
    min: f64,
    max: f64,
    mean: f64,
    std: f64,
    histogram: String,
}

#[derive(Serialize)]
struct AnalyzeSummary {
    bins: usize,
    tensors: Vec<TensorSummary>,
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') { c } else { '_' })
        .collect()
}

fn analyze(cli: &Cli, args: &AnalyzeArgs) -> Result<ExitCode> {
    let tensors = load(&args.input)?;
    let dir = out_dir(cli)?;
    let spec = HistogramSpec::with_bins(args.bins as usize);
    let mut seen = std::collections::BTreeSet::new();
    let mut summaries = Vec::with_capacity(tensors.len());
    for t in &tensors {
        let file = format!("hist_{}.csv", file_stem(t.name()));
        if !seen.insert(file.clone()) {
            bail!("tensor names collide on histogram file {file}");
        }
        export_histogram(t, &spec, dir.join(&file)).with_context(|| format!("writing {file}"))?;
        summaries.push(TensorSummary {
            name: t.name().to_string(),
            shape: t.shape().to_vec(),
            len: t.len(),
            min: t.min(),
            max: t.max(),
            mean: t.mean(),
            std: t.std_dev(),
            histogram: file,
        });
    }
    let summary = AnalyzeSummary { bins: spec.bin_count, tensors: summaries };
    write_json(&dir.join("summary.json"), &summary)?;
    emit(cli, &summary, || {
        summary
            .tensors
            .iter()
            .map(|t| format!("{}: min={} max={} mean={} std={}\n", t.name, t.min, t.max, t.mean, t.std))
            .collect()
    })?;
    Ok(ExitCode::SUCCESS)
}

fn gan_config(cli: &Cli, gan: &GanArgs, d_bits: Option<u32>, g_bits: Option<u32>) -> GanConfig {
    GanConfig {
        d_bits,
        g_bits,
        d_scheme: gan.scheme,
        g_scheme: gan.scheme,
        learning_rate: gan.lr,
        batch_size: gan.batch_size as usize,
        steps: gan.steps,
        eval_every: gan.eval_every as usize,
        eval_samples: gan.eval_samples as usize,
        seed: cli.seed,
        ..GanConfig::default()
    }
}

fn dataset(cli: &Cli) -> RingDataset {
    RingDataset { seed: cli.seed, ..RingDataset::default() }
}

fn classify(history: &[HistoryEntry]) -> Option<RunClass> {
    let scores: Vec<QualityScore> = history.iter().map(|h| h.quality).collect();
    classify_run(&scores, &ClassifierConfig::default()).ok()
}

#[derive(Serialize)]
struct TrainSummary<'a> {
    config: &'a GanConfig,
    steps_run: usize,
    final_quality: Option<QualityScore>,
    final_d_loss: Option<f64>,
    final_g_loss: Option<f64>,
    class: Option<RunClass>,
}

fn train_cmd(cli: &Cli, args: &TrainArgs) -> Result<ExitCode> {
    let config = gan_config(cli, &args.gan, args.d_bits, args.g_bits);
    let dir = out_dir(cli)?;
    let (model, history) = train(&config, &dataset(cli)).context("training failed")?;
    let mut csv = create_csv(&dir.join("history.csv"))?;
    write_history_csv(&mut csv, &history)?;
    csv.flush()?;
    write_weights(dir.join("checkpoint.qgw"), &model.tensors()).context("writing checkpoint")?;
    let last = history.last();
    let summary = TrainSummary {
        config: &config,
        steps_run: config.steps,
        final_quality: last.map(|h| h.quality),
        final_d_loss: last.map(|h| h.d_loss),
        final_g_loss: last.map(|h| h.g_loss),
        class: classify(&history),
    };
    write_json(&dir.join("summary.json"), &summary)?;
    emit(cli, &summary, || match (last, summary.class) {
        (Some(h), class) => format!(
            "step {}: score={} covered={}/{} hq={} class={}\n",
            h.step,
            h.quality.score,
            h.quality.covered_modes,
            h.quality.mode_count,
            h.quality.hq_fraction,
            class.map_or("n/a".to_string(), |c| format!("{c:?}").to_lowercase())
        ),
        (None, _) => "no training steps run\n".to_string(),
    })?;
    Ok(ExitCode::SUCCESS)
}

fn evaluator(cli: &Cli, gan: &GanArgs, mock: Option<crate::MockSpec>, repeats: u64) -> Box<dyn Evaluator> {
    if let Some(m) = mock {
        return Box::new(m.0);
    }
    let real = GanEvaluator { config: gan_config(cli, gan, None, None), dataset: dataset(cli) };
    if repeats > 1 {
        Box::new(Repeated { inner: real, repeats: repeats as usize })
    } else {
        Box::new(real)
    }
}

fn search(cli: &Cli, args: &SearchArgs) -> Result<ExitCode> {
    let dir = out_dir(cli)?;
    let eval = evaluator(cli, &args.gan, args.mock, args.repeats);
    let result = multi_precision_search(eval.as_ref(), args.quality, args.max_bits, cli.seed)?;
    write_json(&dir.join("search.json"), &result)?;
    emit(cli, &result, || {
        let mut s = String::new();
        for e in &result.trail {
            s += &format!("{:?} d_bits={:?} g_bits={:?} score={}\n", e.phase, e.d_bits, e.g_bits, e.score);
        }
        s += &format!(
            "result: d_bits={} g_bits={} satisfied={}\n",
            result.d_bits,
            result.g_bits.map_or("-".into(), |g| g.to_string()),
            result.satisfied
        );
        s
    })?;
    if !result.satisfied && !args.allow_unsat {
        eprintln!("error: quality {} not reached within {} bits", args.quality, args.max_bits);
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SweepRow {
    mode: SweepMode,
    bits: u32,
    score: f64,
    quality: Option<QualityScore>,
    class: Option<RunClass>,
    curve: Option<String>,
}

#[derive(Serialize)]
struct SweepSummary {
    lo: u32,
    hi: u32,
    cells: Vec<SweepRow>,
}

fn sweep(cli: &Cli, args: &SweepArgs) -> Result<ExitCode> {
    let dir = out_dir(cli)?;
    let eval = evaluator(cli, &args.gan, args.mock, 1);
    let result = sensitivity_sweep(eval.as_ref(), &args.modes, args.bits, cli.seed, args.jobs as usize)?;
    let mut csv = create_csv(&dir.join("sweep.csv"))?;
    write_sweep_csv(&mut csv, &result)?;
    csv.flush()?;

    let mut rows = Vec::with_capacity(result.cells.len());
    for c in &result.cells {
        let curve = if c.history.is_empty() {
            None
        } else {
            fs::create_dir_all(dir.join("curves"))?;
            let name = format!("curves/{}_{}.csv", c.mode.as_str(), c.bits);
            let mut f = create_csv(&dir.join(&name))?;
            write_history_csv(&mut f, &c.history)?;
            f.flush()?;
            Some(name)
        };
        rows.push(SweepRow {
            mode: c.mode,
            bits: c.bits,
            score: c.score,
            quality: c.quality,
            class: classify(&c.history),
            curve,
        });
    }
    let summary = SweepSummary { lo: result.lo, hi: result.hi, cells: rows };
    write_json(&dir.join("sweep.json"), &summary)?;
    emit(cli, &summary, || {
        let mut s = String::from("mode  bits  score\n");
        for r in &summary.cells {
            s += &format!("{:<5} {:>4}  {:.4}\n", r.mode.as_str(), r.bits, r.score);
        }
        s
    })?;
    Ok(ExitCode::SUCCESS)
}
