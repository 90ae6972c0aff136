use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::StoreError;
use crate::tensor::Tensor;

pub const HISTOGRAM_HEADER: &str = "bin_lo,bin_hi,count";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub bin_count: usize,
    /// Defaults to the data's min/max.
    pub range: Option<(f64, f64)>,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        Self {
            bin_count: 80,
            range: None,
        }
    }
}

impl HistogramSpec {
    pub fn with_bins(bin_count: usize) -> Self {
        Self {
            bin_count,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), StoreError> {
        if self.bin_count < 2 {
            return Err(StoreError::InvalidHistogram(format!(
                "bin_count must be >= 2, got {}",
                self.bin_count
            )));
        }
        if let Some((lo, hi)) = self.range {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(StoreError::InvalidHistogram(format!(
                    "range must satisfy lo < hi, got ({lo}, {hi})"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Equal-width bins over the configured range.
///
/// Values outside an explicit range are counted in the nearest end bin, so
/// the counts always sum to the tensor length. A constant tensor with no
/// explicit range is binned over `c ± 0.5`.
pub fn histogram(tensor: &Tensor, spec: &HistogramSpec) -> Result<Vec<Bin>, StoreError> {
    spec.validate()?;
    if tensor.is_empty() {
        return Err(StoreError::InvalidHistogram("empty tensor".into()));
    }
    let (lo, hi) = match spec.range {
        Some(r) => r,
        None => {
            let (lo, hi) = (tensor.min(), tensor.max());
            if lo < hi {
                (lo, hi)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        }
    };
    let n = spec.bin_count;
    let width = (hi - lo) / n as f64;
    let mut counts = vec![0usize; n];
    for &v in tensor.data() {
        let idx = ((v - lo) / width).floor();
        let idx = if idx < 0.0 { 0 } else { (idx as usize).min(n - 1) };
        counts[idx] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| Bin {
            lo: lo + width * i as f64,
            hi: if i + 1 == n { hi } else { lo + width * (i + 1) as f64 },
            count,
        })
        .collect())
}

pub fn write_histogram_csv<W: Write>(mut out: W, bins: &[Bin]) -> Result<(), StoreError> {
    writeln!(out, "{HISTOGRAM_HEADER}")?;
    for b in bins {
        writeln!(out, "{},{},{}", b.lo, b.hi, b.count)?;
    }
    Ok(())
}

pub fn export_histogram(
    tensor: &Tensor,
    spec: &HistogramSpec,
    path: impl AsRef<Path>,
) -> Result<(), StoreError> {
    let bins = histogram(tensor, spec)?;
    let mut out = BufWriter::new(File::create(path)?);
    write_histogram_csv(&mut out, &bins)?;
    out.flush()?;
    Ok(())
}
