//! Write-amplification laboratory for SSDs under Trim-modified workloads: a
//! page-mapped log-structured FTL simulator with greedy garbage collection,
//! closed-form steady-state and write-amplification models, and the Monte
//! Carlo harness that compares the two.

pub mod experiment;
pub mod lambert;
pub mod markov;
pub mod ssd;
pub mod workload;
pub mod writeamp;

pub use experiment::{run, RunConfig, RunReport};
pub use lambert::lambert_w0;
pub use markov::{SteadyDistribution, TrimParams};
pub use ssd::{DeviceGeometry, FtlState, SimMetrics};
pub use workload::{Request, RequestGenerator, WorkloadSpec};
pub use writeamp::{WaModel, WaPrediction};
