use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{check_bits_arg, EvalError, Evaluation, Evaluator, SearchError};
use crate::gan::{HistoryEntry, QualityScore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SweepMode {
    #[serde(rename = "d")]
    DOnly,
    #[serde(rename = "both")]
    Both,
    #[serde(rename = "g")]
    GOnly,
}

impl SweepMode {
    pub const ALL: [SweepMode; 3] = [SweepMode::DOnly, SweepMode::Both, SweepMode::GOnly];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepMode::DOnly => "d",
            SweepMode::Both => "both",
            SweepMode::GOnly => "g",
        }
    }

    /// `(d_bits, g_bits)` for this mode at `bits`.
    pub fn bits(self, bits: u32) -> (Option<u32>, Option<u32>) {
        match self {
            SweepMode::DOnly => (Some(bits), None),
            SweepMode::Both => (Some(bits), Some(bits)),
            SweepMode::GOnly => (None, Some(bits)),
        }
    }
}

impl std::str::FromStr for SweepMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "d" => Ok(SweepMode::DOnly),
            "both" => Ok(SweepMode::Both),
            "g" => Ok(SweepMode::GOnly),
            other => Err(format!("unknown sweep mode `{other}` (expected d|both|g)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub mode: SweepMode,
    pub bits: u32,
    pub score: f64,
    pub quality: Option<QualityScore>,
    pub history: Vec<HistoryEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub lo: u32,
    pub hi: u32,
    /// Ordered by the requested mode order, then bits ascending.
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn cell(&self, mode: SweepMode, bits: u32) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.mode == mode && c.bits == bits)
    }
}

pub const SWEEP_HEADER: &str = "mode,bits,score";

pub fn write_sweep_csv<W: Write>(mut out: W, sweep: &SweepResult) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for c in &sweep.cells {
        writeln!(out, "{},{},{}", c.mode.as_str(), c.bits, c.score)?;
    }
    Ok(())
}

/// Evaluates every `(mode, bits)` cell with `lo <= bits <= hi`, all with
/// the same seed. With `jobs > 1` cells run on a scoped thread pool; the
/// result does not depend on `jobs`.
pub fn sensitivity_sweep<E: Evaluator + ?Sized>(
    evaluator: &E,
    modes: &[SweepMode],
    (lo, hi): (u32, u32),
    seed: u64,
    jobs: usize,
) -> Result<SweepResult, SearchError> {
    check_bits_arg("lo", lo)?;
    check_bits_arg("hi", hi)?;
    if lo > hi {
        return Err(SearchError::InvalidArgument(format!("empty bit range {lo}..{hi}")));
    }
    if modes.is_empty() {
        return Err(SearchError::InvalidArgument("no sweep modes given".into()));
    }
    let jobs = jobs.max(1);
    let tasks: Vec<(SweepMode, u32)> = modes
        .iter()
        .flat_map(|&m| (lo..=hi).map(move |b| (m, b)))
        .collect();

    let run = |&(mode, bits): &(SweepMode, u32)| {
        let (d, g) = mode.bits(bits);
        evaluator.evaluate(d, g, seed)
    };
    let results: Vec<Result<Evaluation, EvalError>> = if jobs == 1 {
        tasks.iter().map(run).collect()
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let slots: Vec<std::sync::Mutex<Option<Result<Evaluation, EvalError>>>> =
            tasks.iter().map(|_| std::sync::Mutex::new(None)).collect();
        std::thread::scope(|s| {
            for _ in 0..jobs.min(tasks.len()) {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if i >= tasks.len() {
                        break;
                    }
                    *slots[i].lock().unwrap() = Some(run(&tasks[i]));
                });
            }
        });
        slots.into_iter().map(|m| m.into_inner().unwrap().expect("every cell evaluated")).collect()
    };

    let mut cells = Vec::with_capacity(tasks.len());
    for (&(mode, bits), result) in tasks.iter().zip(results) {
        let e = result.map_err(|source| SearchError::SweepCell { mode, bits, source })?;
        cells.push(SweepCell { mode, bits, score: e.score, quality: e.quality, history: e.history });
    }
    Ok(SweepResult { lo, hi, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::FnEvaluator;

    fn curve(k: Option<u32>, slope: f64) -> f64 {
        k.map_or(1.0, |k| (slope * k as f64).min(1.0))
    }

    fn min_mock() -> impl Evaluator {
        FnEvaluator(|d, g, _| Ok(Evaluation::from_score(curve(d, 0.3).min(curve(g, 0.25)))))
    }

    #[test]
    fn both_mode_is_min_of_single_modes() {
        let r = sensitivity_sweep(&min_mock(), &SweepMode::ALL, (2, 2), 0, 1).unwrap();
        let s = |m| r.cell(m, 2).unwrap().score;
        assert_eq!(s(SweepMode::Both), s(SweepMode::DOnly).min(s(SweepMode::GOnly)));
    }

    #[test]
    fn full_grid_and_parallel_agree() {
        let serial = sensitivity_sweep(&min_mock(), &SweepMode::ALL, (1, 4), 3, 1).unwrap();
        assert_eq!(serial.cells.len(), 12);
        let parallel = sensitivity_sweep(&min_mock(), &SweepMode::ALL, (1, 4), 3, 4).unwrap();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn bad_ranges() {
        for range in [(0, 2), (3, 2), (1, 17)] {
            assert!(sensitivity_sweep(&min_mock(), &SweepMode::ALL, range, 0, 1).is_err());
        }
        assert!(sensitivity_sweep(&min_mock(), &[], (1, 2), 0, 1).is_err());
    }
}
