//! Monte Carlo experiments, aggregation, bound tables and file output.
//!
//! Runs are independent trajectories on child RNG streams `(seed, run_id)`
//! and are merged by `(run_id, t)`, so every output byte is a function of the
//! configuration.

pub mod certify;
pub mod config;
pub mod output;
pub mod report;
pub mod run;
pub mod stats;

pub use certify::{certify, CertificationReport, CertifyOptions, CertifyTarget};
pub use config::{ExperimentConfig, PotentialSelection};
pub use output::{emit_plot_data, write_experiment};
pub use report::{bound_report, compare_betas, BoundReport, CompareTable};
pub use run::{run_experiment, run_single, ExperimentOutput, RunRecord};
pub use stats::{aggregate, Moments, SteadyEstimate, SummaryStats};

/// Cycle, averaging, unit weights, `T = 200·n²`: the setup behind the
/// normalized-gap curve.
pub fn gap_curve_config(n: usize, runs: usize, seed: u64) -> ExperimentConfig {
    let n64 = n as u64;
    ExperimentConfig::new(n, 200 * n64 * n64, runs, seed)
}
