use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::run::run_experiment;
use super::stats::SummaryStats;
use crate::error::{invalid, Result};
use crate::gapcover::{alpha_k, floor_log2, Convention};
use crate::potentials::{harary_bound, stationary_bounds, ExpectedMap};
use crate::process::ProcessKind;

/// One `coefficient · √(bound on E[φ_hop])` term of the gap chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainTerm {
    pub hop: usize,
    pub coefficient: f64,
    /// `hop·(n − hop)·E[W²]`.
    pub phi_bound: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HararyBounds {
    /// Exact stationary `E[φ_k]` of the Harary2 map.
    pub fixed_point: Vec<f64>,
    /// `((2/5)k(n−k) + 2n)·E[W²]`.
    pub bounds: Vec<f64>,
    pub holds: bool,
    /// `max_k (fixed_point_k − (2/5)k(n−k)·E[W²]) / (n·E[W²])`; at most 2 when the bound holds.
    pub max_excess_over_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredGap {
    pub runs: usize,
    pub steps: u64,
    pub burn_in: u64,
    pub mean_gap: f64,
    pub se_gap: f64,
    pub mean_norm_gap: f64,
    pub mean_gap_sq_over_n: f64,
    pub se_gap_sq_over_n: f64,
    pub below_gap_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub ew2: f64,
    pub convention: Convention,
    /// `y_k = (k(n−k) − 1)·E[W²]` for `k = 1..n−1`.
    pub stationary_bounds: Vec<f64>,
    pub chain_terms: Vec<ChainTerm>,
    /// Upper bound on `n·E[Gap]`: the sum of the chain terms.
    pub chain_bound: f64,
    /// `chain_bound / n`, an upper bound on `E[Gap]`.
    pub gap_bound: f64,
    /// `chain_bound / (n^{3/2}·log₂ n·√E[W²])`.
    pub log_form_ratio: Option<f64>,
    pub harary: Option<HararyBounds>,
    pub measured: Option<MeasuredGap>,
}

/// Largest `n` for which the Harary fixed point is solved in a report.
pub const HARARY_REPORT_MAX_N: usize = 1024;

/// Numeric evaluation of the potential bounds and the gap chain for `n`.
pub fn bound_report(n: usize, ew2: f64) -> Result<BoundReport> {
    let y = stationary_bounds(n, ew2)?;
    let convention = Convention::natural(n);
    let nf = n as f64;
    let term = |hop: usize, coefficient: f64| {
        let phi_bound = (hop * (n - hop)) as f64 * ew2;
        ChainTerm {
            hop,
            coefficient,
            phi_bound,
            value: coefficient * phi_bound.sqrt(),
        }
    };
    let mut chain_terms = Vec::new();
    match convention {
        Convention::PowerOfTwo => {
            chain_terms.push(term(n / 2, nf.sqrt()));
            for k in 1..floor_log2(n) {
                let hop = 1usize << (k - 1);
                chain_terms.push(term(hop, nf / (hop as f64).sqrt()));
            }
        }
        Convention::General => {
            for k in 1..=floor_log2(n) {
                let width = n >> k;
                chain_terms.push(term(
                    alpha_k(n, k)?,
                    n.div_ceil(width) as f64 * (width as f64).sqrt(),
                ));
            }
            chain_terms.push(term(1, nf));
        }
    }
    let chain_bound: f64 = chain_terms.iter().map(|t| t.value).sum();
    let loose = nf.powf(1.5) * nf.log2() * ew2.sqrt();

    let harary = if (5..=HARARY_REPORT_MAX_N).contains(&n) {
        let fp = ExpectedMap::harary(n)?.fixed_point(ew2)?.into_values();
        let bounds: Vec<f64> = (1..n).map(|k| harary_bound(n, k, ew2)).collect();
        let holds = fp.iter().zip(&bounds).all(|(f, b)| f <= b);
        let max_excess = fp
            .iter()
            .enumerate()
            .map(|(i, f)| f - 0.4 * ((i + 1) * (n - i - 1)) as f64 * ew2)
            .fold(f64::NEG_INFINITY, f64::max);
        Some(HararyBounds {
            fixed_point: fp,
            bounds,
            holds,
            max_excess_over_n: if ew2 > 0.0 {
                max_excess / (nf * ew2)
            } else {
                0.0
            },
        })
    } else {
        None
    };

    Ok(BoundReport {
        n,
        ew2,
        convention,
        stationary_bounds: y.y,
        chain_terms,
        chain_bound,
        gap_bound: chain_bound / nf,
        log_form_ratio: (loose > 0.0).then(|| chain_bound / loose),
        harary,
        measured: None,
    })
}

impl BoundReport {
    /// Attaches steady-state measurements from an experiment on the same `n`.
    pub fn with_measurement(
        mut self,
        config: &ExperimentConfig,
        stats: &SummaryStats,
    ) -> Result<Self> {
        if stats.n != self.n {
            return Err(invalid(format!(
                "measurement on n = {} for a report on n = {}",
                stats.n, self.n
            )));
        }
        let s = &stats.steady;
        self.measured = Some(MeasuredGap {
            runs: stats.runs,
            steps: config.steps,
            burn_in: config.burn_in_steps(),
            mean_gap: s.gap.mean,
            se_gap: s.gap.se,
            mean_norm_gap: s.normalized_gap.mean,
            mean_gap_sq_over_n: s.gap_squared_over_n.mean,
            se_gap_sq_over_n: s.gap_squared_over_n.se,
            below_gap_bound: s.gap.mean <= self.gap_bound,
        });
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub beta: f64,
    pub mean_gap: f64,
    pub se_gap: f64,
    pub mean_norm_gap: f64,
    pub mean_gap_sq_over_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareTable {
    pub base: ExperimentConfig,
    pub rows: Vec<CompareRow>,
}

pub const COMPARE_HEADER: &str = "beta,mean_gap,se_gap,mean_norm_gap,mean_gap_sq_over_n";

/// Steady-state gaps of the β-hybrid for each `β`, every `β` on the same
/// seeds. The process in `base` is ignored.
pub fn compare_betas(base: &ExperimentConfig, betas: &[f64]) -> Result<CompareTable> {
    if betas.is_empty() {
        return Err(invalid("no β values to compare"));
    }
    let mut rows = Vec::with_capacity(betas.len());
    for &beta in betas {
        let config = ExperimentConfig {
            process: ProcessKind::Hybrid { beta },
            ..base.clone()
        };
        let stats = run_experiment(&config)?.aggregate()?;
        let s = &stats.steady;
        rows.push(CompareRow {
            beta,
            mean_gap: s.gap.mean,
            se_gap: s.gap.se,
            mean_norm_gap: s.normalized_gap.mean,
            mean_gap_sq_over_n: s.gap_squared_over_n.mean,
        });
    }
    Ok(CompareTable {
        base: base.clone(),
        rows,
    })
}

pub fn write_compare_csv<W: Write + ?Sized>(w: &mut W, table: &CompareTable) -> io::Result<()> {
    writeln!(w, "{COMPARE_HEADER}")?;
    for r in &table.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.beta, r.mean_gap, r.se_gap, r.mean_norm_gap, r.mean_gap_sq_over_n
        )?;
    }
    Ok(())
}
