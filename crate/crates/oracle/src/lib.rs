//! Ground truth that does not go through diagrams: Monte Carlo simulation of
//! the SDE, closed-form moments for the exactly solvable cases, and a brute
//! force pair-partition sum on a time grid.

mod exact;
mod isserlis;
mod mc;

pub use exact::{exact_benchmark, Benchmark, BenchmarkValue};
pub use isserlis::{isserlis_gamma_delta, pair_partitions, IsserlisGrid, MAX_XI_SLOTS};
pub use mc::{simulate, write_mc_csv, MCConfig, MCEstimate, MCResult, Scheme, CHUNK_PATHS};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("path {path} became non-finite at t = {time} (epsilon = {epsilon}); try a smaller epsilon")]
    UnstablePath { path: u64, time: f64, epsilon: f64 },
    #[error("benchmark {benchmark} does not apply: {reason}")]
    ShapeMismatch { benchmark: String, reason: String },
    #[error("unknown benchmark {0}")]
    UnknownBenchmark(String),
    #[error("{slots} ξ-slots requested; at most {max} are supported")]
    TooManySlots { slots: usize, max: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] sdemsr_model::ModelError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
