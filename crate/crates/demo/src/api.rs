use qgan_core::gan::{sample_noise, train, GanConfig, RingDataset};
use qgan_core::quant::{em_fit, fit_and_quantize, quant_report, EmOptions, QuantOptions, Scheme};
use qgan_core::seed::{rng_for, Stream};
use qgan_core::store::{histogram, random_tensor_with_sigma, HistogramSpec, TensorKind};
use qgan_core::Tensor;
use serde::Serialize;
use serde_json::json;

const MAX_ELEMENTS: usize = 200_000;
const MAX_STEPS: usize = 20_000;
const PREVIEW_SAMPLES: usize = 1000;

fn tensor(kind: &str, n: usize, sigma: f64, seed: u64) -> Result<Tensor, String> {
    let kind = match kind {
        "gaussian" => TensorKind::Gaussian,
        "uniform" => TensorKind::Uniform,
        "bimodal" => TensorKind::Bimodal,
        other => return Err(format!("unknown tensor kind `{other}`")),
    };
    if n == 0 || n > MAX_ELEMENTS {
        return Err(format!("element count must lie in 1..={MAX_ELEMENTS}"));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err("sigma must be positive".into());
    }
    Ok(random_tensor_with_sigma(kind, n, seed, sigma))
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// Input histogram plus the occupied reconstruction levels.
pub fn quantize_preview(
    kind: &str,
    n: usize,
    sigma: f64,
    seed: u64,
    scheme: &str,
    bits: u32,
    bins: usize,
) -> Result<String, String> {
    let w = tensor(kind, n, sigma, seed)?;
    let scheme: Scheme = scheme.parse()?;
    let fitted = fit_and_quantize(&w, scheme, bits, &QuantOptions::default()).map_err(|e| e.to_string())?;
    let hist = histogram(&w, &HistogramSpec::with_bins(bins)).map_err(|e| e.to_string())?;

    let mut levels: Vec<(f64, usize)> = Vec::new();
    let mut values: Vec<f64> = fitted.outcome.quantized.data().to_vec();
    values.sort_by(f64::total_cmp);
    for v in values {
        match levels.last_mut() {
            Some((last, count)) if *last == v => *count += 1,
            _ => levels.push((v, 1)),
        }
    }
    let report = quant_report(&fitted.outcome, bits);
    to_json(&json!({
        "histogram": hist,
        "levels": levels.iter().map(|&(value, count)| json!({"value": value, "count": count})).collect::<Vec<_>>(),
        "alpha": fitted.params.alpha,
        "beta": fitted.params.beta,
        "report": report,
    }))
}

pub fn em_trace(kind: &str, n: usize, sigma: f64, seed: u64, bits: u32) -> Result<String, String> {
    let w = tensor(kind, n, sigma, seed)?;
    let (params, outcome, trace) = em_fit(&w, bits, &EmOptions::default()).map_err(|e| e.to_string())?;
    let minmax = fit_and_quantize(&w, Scheme::MinMax, bits, &QuantOptions::default()).map_err(|e| e.to_string())?;
    to_json(&json!({
        "iterations": trace.iterations,
        "converged": trace.converged,
        "minmax_error": minmax.outcome.l2_error,
        "em_error": outcome.l2_error,
        "alpha": params.alpha,
        "beta": params.beta,
    }))
}

pub fn train_gan(d_bits: u32, g_bits: u32, scheme: &str, steps: usize, seed: u64) -> Result<String, String> {
    if steps > MAX_STEPS {
        return Err(format!("at most {MAX_STEPS} steps"));
    }
    let scheme: Scheme = scheme.parse()?;
    let bits = |b: u32| (b > 0).then_some(b);
    let config = GanConfig {
        d_bits: bits(d_bits),
        g_bits: bits(g_bits),
        d_scheme: scheme,
        g_scheme: scheme,
        steps,
        eval_every: 100,
        eval_samples: 2000,
        seed,
        ..GanConfig::default()
    };
    let dataset = RingDataset { seed, ..RingDataset::default() };
    let (model, history) = train(&config, &dataset).map_err(|e| e.to_string())?;
    let mut rng = rng_for(seed, Stream::Eval);
    let noise = sample_noise(PREVIEW_SAMPLES, config.noise_dim, &mut rng);
    let fake = model.generate(&noise).map_err(|e| e.to_string())?;
    let real = dataset.sample(PREVIEW_SAMPLES, &mut rng);
    let pairs = |t: &Tensor| t.data().chunks(2).map(|p| [p[0], p[1]]).collect::<Vec<_>>();
    to_json(&json!({
        "history": history,
        "real": pairs(&real),
        "fake": pairs(&fake),
    }))
}
