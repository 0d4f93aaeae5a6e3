//! Dynamic load balancing by pairwise averaging on cycle and Harary graphs.
//!
//! Every step a weight is injected on a uniformly random edge and the two
//! endpoints average their loads (plus the new weight). The crate provides:
//!
//! * [`topology`]: the cycle and the 2-hop Harary graph, with uniform edge sampling;
//! * [`process`]: the averaging process, graphical two-choice and the β-hybrid;
//! * [`potentials`]: k-hop potentials, the exact expected one-step maps, the
//!   stationary bound vector and the Z-chain certifier;
//! * [`gapcover`]: the covering sets used to bound the global gap by hop
//!   potentials, with deterministic verifiers for every inequality in the chain;
//! * [`harness`]: Monte Carlo experiments, statistics and report/CSV output.
//!
//! Node indices are 0-based throughout.

pub mod error;
pub mod gapcover;
pub mod harness;
pub mod potentials;
pub mod process;
pub mod rng;
pub mod topology;

pub use error::{Error, Result};
pub use process::{ProcessKind, ProcessState, WeightDistribution};
pub use topology::{Topology, TopologyKind};
