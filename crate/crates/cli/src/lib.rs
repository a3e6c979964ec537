//! Batch front end: one TOML config drives expansion, evaluation,
//! correspondence checks, simulation and a joined report.

mod config;
mod run;

pub use config::{
    load_config, parse_config, ChiBlock, CheckSpec, CoeffSpec, ExpansionBlock, FnSpec, McBlock, ModelBlock,
    NumberOrText, ObservablesBlock, OutputBlock, Pipeline, QuadratureBlock, RouteSpec, RunConfig,
};
pub use run::{embedded_config, run, Command, Outcome};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in {field}: {message}")]
    Config { field: String, message: String },
    #[error("engine error: {0}")]
    Engine(String),
    #[error("{0} correspondence check(s) failed")]
    CheckFailed(usize),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    /// Process exit status: 2 for configuration problems, 3 for engine and
    /// i/o failures, 4 when a check ran and did not pass.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Engine(_) | CliError::Io { .. } => 3,
            CliError::CheckFailed(_) => 4,
        }
    }
}

pub(crate) fn engine<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Engine(e.to_string())
}
