//! `qgan`: quantize weight archives, inspect weight distributions, and run
//! quantized toy-GAN experiments.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error.

mod commands;
mod mock;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qgan_core::quant::Scheme;
use qgan_core::search::SweepMode;

use mock::MockSpec;

#[derive(Debug, Parser)]
#[command(name = "qgan", version, about = "Weight quantization and quantized toy-GAN experiments")]
pub struct Cli {
    /// Root seed for every random stream.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output directory for artifacts.
    #[arg(long, default_value = "./out")]
    pub out: PathBuf,
    /// Print a JSON document on stdout instead of text.
    #[arg(long)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quantize every tensor of a QGW1 archive.
    Quantize(QuantizeArgs),
    /// Write per-tensor histograms and summary statistics.
    Analyze(AnalyzeArgs),
    /// Train the toy GAN.
    Train(TrainArgs),
    /// Find the smallest D then G bit-widths meeting a quality target.
    Search(SearchArgs),
    /// Score every (mode, bits) cell of a quantization sweep.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct QuantizeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long = "out")]
    pub output: PathBuf,
    #[arg(long, default_value = "em")]
    pub scheme: Scheme,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=16))]
    pub bits: u32,
    #[arg(long, default_value_t = qgan_core::quant::DEFAULT_EPSILON, value_parser = positive)]
    pub epsilon: f64,
    #[arg(long, default_value_t = qgan_core::quant::DEFAULT_SATURATION_DELTA, value_parser = open_unit)]
    pub delta: f64,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 80, value_parser = clap::value_parser!(u64).range(2..=1_000_000))]
    pub bins: u64,
}

#[derive(Debug, Args, Clone)]
pub struct GanArgs {
    /// Weight quantization scheme for both networks.
    #[arg(long, default_value = "em")]
    pub scheme: Scheme,
    #[arg(long, default_value_t = 4000)]
    pub steps: usize,
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u64).range(1..))]
    pub batch_size: u64,
    #[arg(long, default_value_t = 2e-4, value_parser = non_negative)]
    pub lr: f64,
    #[arg(long, default_value_t = 250, value_parser = clap::value_parser!(u64).range(1..))]
    pub eval_every: u64,
    #[arg(long, default_value_t = 5000, value_parser = clap::value_parser!(u64).range(1..))]
    pub eval_samples: u64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=16))]
    pub d_bits: Option<u32>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=16))]
    pub g_bits: Option<u32>,
    #[command(flatten)]
    pub gan: GanArgs,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Quality target in (0, 1].
    #[arg(long, value_parser = quality)]
    pub quality: f64,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=16))]
    pub max_bits: u32,
    /// Replace training with a linear mock, e.g. "0.3d,0.25g".
    #[arg(long)]
    pub mock: Option<MockSpec>,
    /// Exit 0 even when the target is not reached.
    #[arg(long)]
    pub allow_unsat: bool,
    /// Runs per configuration; the median score is used.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=99))]
    pub repeats: u64,
    #[command(flatten)]
    pub gan: GanArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "d,both,g")]
    pub modes: Vec<SweepMode>,
    /// Inclusive bit range, e.g. "1..4".
    #[arg(long, value_parser = bit_range)]
    pub bits: (u32, u32),
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=256))]
    pub jobs: u64,
    #[arg(long)]
    pub mock: Option<MockSpec>,
    #[command(flatten)]
    pub gan: GanArgs,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|e| e.to_string())
}

fn positive(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v.is_finite() { Ok(v) } else { Err(format!("expected a positive number, got {s}")) }
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v >= 0.0 && v.is_finite() { Ok(v) } else { Err(format!("expected a non-negative number, got {s}")) }
}

fn open_unit(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v < 1.0 { Ok(v) } else { Err(format!("expected a value in (0, 1), got {s}")) }
}

fn quality(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v <= 1.0 { Ok(v) } else { Err(format!("quality must lie in (0, 1], got {s}")) }
}

fn bit_range(s: &str) -> Result<(u32, u32), String> {
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (lo, hi.strip_prefix('=').unwrap_or(hi)),
        None => (s, s),
    };
    let parse = |v: &str| v.trim().parse::<u32>().map_err(|e| format!("bad bit-width `{v}`: {e}"));
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if (1..=16).contains(&lo) && (lo..=16).contains(&hi) {
        Ok((lo, hi))
    } else {
        Err(format!("expected 1 <= lo <= hi <= 16, got {lo}..{hi}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
