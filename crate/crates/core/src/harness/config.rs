use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::{ProcessKind, WeightDistribution};
use crate::topology::{Topology, TopologyKind};

/// Which `φ_k` are recorded at every sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "hops")]
pub enum PotentialSelection {
    None,
    /// `k ∈ {1, 2, 4, …}` up to `⌊n/2⌋`.
    Powers,
    /// Every `k` in `1..n`. Costs `O(n²)` per sample.
    All,
    List(Vec<usize>),
}

impl PotentialSelection {
    pub fn hops(&self, n: usize) -> Vec<usize> {
        match self {
            PotentialSelection::None => Vec::new(),
            PotentialSelection::Powers => std::iter::successors(Some(1usize), |k| Some(k * 2))
                .take_while(|&k| k <= n / 2)
                .collect(),
            PotentialSelection::All => (1..n).collect(),
            PotentialSelection::List(ks) => ks.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub topology: TopologyKind,
    pub n: usize,
    pub process: ProcessKind,
    pub weights: WeightDistribution,
    /// Total steps `T` per run.
    pub steps: u64,
    pub runs: usize,
    pub seed: u64,
    /// Recording stride; defaults to `max(1, T/2000)`.
    pub sample_every: Option<u64>,
    /// Steps excluded from steady-state statistics; defaults to
    /// `min(10·n², T/2)`.
    pub burn_in: Option<u64>,
    pub potentials: PotentialSelection,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Averaging with unit weights on the cycle, no potentials recorded.
    pub fn new(n: usize, steps: u64, runs: usize, seed: u64) -> Self {
        Self {
            topology: TopologyKind::Cycle,
            n,
            process: ProcessKind::Averaging,
            weights: WeightDistribution::Unit,
            steps,
            runs,
            seed,
            sample_every: None,
            burn_in: None,
            potentials: PotentialSelection::None,
            workers: None,
            out: None,
        }
    }

    pub fn sample_stride(&self) -> u64 {
        self.sample_every.unwrap_or((self.steps / 2000).max(1))
    }

    pub fn burn_in_steps(&self) -> u64 {
        self.burn_in.unwrap_or_else(|| {
            let n = self.n as u64;
            (10 * n * n).min(self.steps / 2)
        })
    }

    /// Sampling timestamps `0, s, 2s, …` up to `T`.
    pub fn sample_times(&self) -> impl Iterator<Item = u64> {
        let s = self.sample_stride();
        (0..=self.steps / s).map(move |j| j * s)
    }

    pub fn hops(&self) -> Vec<usize> {
        self.potentials.hops(self.n)
    }

    pub fn topology(&self) -> Result<Topology> {
        Topology::new(self.topology, self.n).map_err(as_config)
    }

    /// Checks every invariant. `steps = 0` is accepted together with
    /// `burn_in = 0` and yields a single sample at `t = 0`.
    pub fn validate(&self) -> Result<()> {
        self.topology()?;
        self.process.validate().map_err(as_config)?;
        self.weights.sampler().map_err(as_config)?;
        if self.runs == 0 {
            return Err(config("runs must be at least 1"));
        }
        if self.sample_every == Some(0) {
            return Err(config("sample_every must be at least 1"));
        }
        let burn_in = self.burn_in_steps();
        if self.steps == 0 {
            if burn_in != 0 {
                return Err(config("burn_in must be 0 when steps is 0"));
            }
        } else if burn_in >= self.steps {
            return Err(config(format!(
                "burn_in ({burn_in}) must be below steps ({})",
                self.steps
            )));
        }
        if let Some(&k) = self.hops().iter().find(|&&k| k == 0 || k >= self.n) {
            return Err(config(format!(
                "potential hop {k} outside 1..{}",
                self.n - 1
            )));
        }
        if self.workers == Some(0) {
            return Err(config("workers must be at least 1"));
        }
        Ok(())
    }
}

fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn as_config(e: Error) -> Error {
    match e {
        Error::InvalidParameter(m) => Error::Config(m),
        other => other,
    }
}
