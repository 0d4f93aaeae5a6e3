use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::potentials::hop_potential_unchecked;
use crate::process::ProcessState;
use crate::rng;

/// One sample of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: u64,
    pub t: u64,
    pub gap: f64,
    pub gap_squared: f64,
    pub normalized_gap: f64,
    /// `φ_k` for the configured hops, in the same order.
    pub phi: Vec<f64>,
}

impl RunRecord {
    fn sample(run_id: u64, state: &ProcessState, hops: &[usize]) -> Self {
        let loads = state.loads();
        let gap = state.gap();
        Self {
            run_id,
            t: state.t(),
            gap,
            gap_squared: gap * gap,
            normalized_gap: gap / (loads.len() as f64).sqrt(),
            phi: hops
                .iter()
                .map(|&k| hop_potential_unchecked(loads, k))
                .collect(),
        }
    }
}

/// Records of all runs, ordered by `(run_id, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub hops: Vec<usize>,
    pub records: Vec<RunRecord>,
}

/// A single trajectory on the child stream `(seed, run_id)`.
pub fn run_single(config: &ExperimentConfig, run_id: u64) -> Result<Vec<RunRecord>> {
    config.validate()?;
    Ok(run_validated(config, run_id, &config.hops()))
}

fn run_validated(config: &ExperimentConfig, run_id: u64, hops: &[usize]) -> Vec<RunRecord> {
    let topology = config.topology().expect("validated");
    let sampler = config.weights.sampler().expect("validated");
    let kind = config.process;
    let stride = config.sample_stride();
    let mut rng = rng::child_stream(config.seed, run_id);
    let mut state = ProcessState::new(&topology);

    let mut out = Vec::with_capacity((config.steps / stride + 1) as usize);
    out.push(RunRecord::sample(run_id, &state, hops));
    for _ in 0..config.steps / stride {
        for _ in 0..stride {
            state.step(kind, &topology, &sampler, &mut rng);
        }
        out.push(RunRecord::sample(run_id, &state, hops));
    }
    out
}

/// Runs every replicate, in parallel, and merges them by `(run_id, t)`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let hops = config.hops();
    let go = || -> Vec<Vec<RunRecord>> {
        (0..config.runs as u64)
            .into_par_iter()
            .map(|r| run_validated(config, r, &hops))
            .collect()
    };
    let per_run = match config.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {w} workers: {e}")))?
            .install(go),
        None => go(),
    };
    Ok(ExperimentOutput {
        config: config.clone(),
        hops,
        records: per_run.into_iter().flatten().collect(),
    })
}
