use serde::{Deserialize, Serialize};

use super::run::{ExperimentOutput, RunRecord};
use crate::error::{Error, Result};

/// Number of contiguous batches each run's steady-state window is cut into
/// for the standard error.
pub const BATCHES_PER_RUN: usize = 10;

/// Across-run statistics at one timestamp. `std` is the sample standard
/// deviation (0 for a single run).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Moments {
    pub fn of(values: &[f64]) -> Self {
        let len = values.len() as f64;
        let mean = values.iter().sum::<f64>() / len;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let var = if values.len() > 1 && min < max {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (len - 1.0)
        } else {
            0.0
        };
        // Rounding can push the mean of identical values a hair outside.
        Self {
            mean: mean.clamp(min, max),
            std: var.sqrt(),
            min,
            max,
        }
    }
}

/// Time average over the steady-state window, pooled over runs, with a
/// batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyEstimate {
    pub mean: f64,
    pub se: f64,
    pub samples: usize,
    pub batches: usize,
}

impl SteadyEstimate {
    /// `per_run[r]` holds run `r`'s window samples in time order.
    pub fn from_runs(per_run: &[Vec<f64>]) -> Self {
        let samples: usize = per_run.iter().map(Vec::len).sum();
        if samples == 0 {
            return Self {
                mean: f64::NAN,
                se: f64::NAN,
                samples: 0,
                batches: 0,
            };
        }
        let mean = per_run.iter().flatten().sum::<f64>() / samples as f64;
        let mut batch_means = Vec::new();
        for run in per_run {
            let b = BATCHES_PER_RUN.min(run.len());
            for j in 0..b {
                let chunk = &run[j * run.len() / b..(j + 1) * run.len() / b];
                batch_means.push(chunk.iter().sum::<f64>() / chunk.len() as f64);
            }
        }
        let batches = batch_means.len();
        let se = if batches > 1 {
            let bm = batch_means.iter().sum::<f64>() / batches as f64;
            let var =
                batch_means.iter().map(|v| (v - bm).powi(2)).sum::<f64>() / (batches as f64 - 1.0);
            (var / batches as f64).sqrt()
        } else {
            f64::INFINITY
        };
        Self {
            mean,
            se,
            samples,
            batches,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    /// First timestamp included (`t ≥ burn_in`).
    pub window_start: u64,
    pub gap: SteadyEstimate,
    pub normalized_gap: SteadyEstimate,
    /// `Gap² / n`.
    pub gap_squared_over_n: SteadyEstimate,
    /// `(k, estimate of φ_k)`.
    pub phi: Vec<(usize, SteadyEstimate)>,
}

impl SteadyState {
    pub fn phi(&self, k: usize) -> Option<&SteadyEstimate> {
        self.phi.iter().find(|(h, _)| *h == k).map(|(_, e)| e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub runs: usize,
    pub times: Vec<u64>,
    pub gap: Vec<Moments>,
    pub gap_squared: Vec<Moments>,
    pub normalized_gap: Vec<Moments>,
    pub phi: Vec<(usize, Vec<Moments>)>,
    pub steady: SteadyState,
}

impl SummaryStats {
    /// Mean of the across-run mean normalized gap over the last `fraction`
    /// of timestamps.
    pub fn trailing_mean_normalized_gap(&self, fraction: f64) -> f64 {
        let len = self.times.len();
        let keep = ((len as f64 * fraction).ceil() as usize).clamp(1, len);
        let tail = &self.normalized_gap[len - keep..];
        tail.iter().map(|m| m.mean).sum::<f64>() / keep as f64
    }
}

/// Per-timestamp statistics across runs plus steady-state averages over
/// `t ≥ burn_in`.
///
/// `records` must be ordered by `(run_id, t)` and every run must share the
/// same timestamps.
pub fn aggregate(
    records: &[RunRecord],
    n: usize,
    burn_in: u64,
    hops: &[usize],
) -> Result<SummaryStats> {
    let err = |m: String| Error::Aggregation(m);
    if records.is_empty() {
        return Err(err("no records to aggregate".into()));
    }
    if n == 0 {
        return Err(err("n must be positive".into()));
    }
    let mut runs: Vec<&[RunRecord]> = Vec::new();
    let mut start = 0;
    for i in 1..=records.len() {
        if i == records.len() || records[i].run_id != records[start].run_id {
            runs.push(&records[start..i]);
            start = i;
        }
    }
    let times: Vec<u64> = runs[0].iter().map(|r| r.t).collect();
    if times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(err("timestamps within a run must increase".into()));
    }
    for run in &runs {
        if run.len() != times.len() || run.iter().zip(&times).any(|(r, &t)| r.t != t) {
            return Err(err(format!(
                "run {} is on a different sampling grid",
                run[0].run_id
            )));
        }
        if let Some(r) = run.iter().find(|r| r.phi.len() != hops.len()) {
            return Err(err(format!(
                "run {} at t = {} has {} potentials, expected {}",
                r.run_id,
                r.t,
                r.phi.len(),
                hops.len()
            )));
        }
    }
    let mut ids: Vec<u64> = runs.iter().map(|r| r[0].run_id).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(err("records of a run are not contiguous".into()));
    }

    let across = |f: &dyn Fn(&RunRecord) -> f64| -> Vec<Moments> {
        (0..times.len())
            .map(|j| Moments::of(&runs.iter().map(|run| f(&run[j])).collect::<Vec<_>>()))
            .collect()
    };
    let nf = n as f64;
    let first = times
        .iter()
        .position(|&t| t >= burn_in)
        .unwrap_or(times.len());
    let steady = |f: &dyn Fn(&RunRecord) -> f64| -> SteadyEstimate {
        let per_run: Vec<Vec<f64>> = runs
            .iter()
            .map(|run| run[first..].iter().map(f).collect())
            .collect();
        SteadyEstimate::from_runs(&per_run)
    };

    Ok(SummaryStats {
        n,
        runs: runs.len(),
        gap: across(&|r| r.gap),
        gap_squared: across(&|r| r.gap_squared),
        normalized_gap: across(&|r| r.normalized_gap),
        phi: hops
            .iter()
            .enumerate()
            .map(|(i, &k)| (k, across(&|r| r.phi[i])))
            .collect(),
        steady: SteadyState {
            window_start: times.get(first).copied().unwrap_or(burn_in),
            gap: steady(&|r| r.gap),
            normalized_gap: steady(&|r| r.normalized_gap),
            gap_squared_over_n: steady(&|r| r.gap_squared / nf),
            phi: hops
                .iter()
                .enumerate()
                .map(|(i, &k)| (k, steady(&|r| r.phi[i])))
                .collect(),
        },
        times,
    })
}

impl ExperimentOutput {
    pub fn aggregate(&self) -> Result<SummaryStats> {
        aggregate(
            &self.records,
            self.config.n,
            self.config.burn_in_steps(),
            &self.hops,
        )
    }
}
