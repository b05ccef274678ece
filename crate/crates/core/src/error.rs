use thiserror::Error;

use crate::eval::EvalError;
use crate::grid::GridError;
use crate::models::ModelError;
use crate::pipeline::PipelineError;
use crate::report::ReportError;
use crate::synth::SynthError;

/// Crate-level error, one variant per module.
#[derive(Debug, Error)]
pub enum Error {
    #[error("report_parser: {0}")]
    Report(#[from] ReportError),
    #[error("env_grid: {0}")]
    Grid(#[from] GridError),
    #[error("fusion_pipeline: {0}")]
    Pipeline(#[from] PipelineError),
    #[error("models: {0}")]
    Model(#[from] ModelError),
    #[error("evaluation: {0}")]
    Eval(#[from] EvalError),
    #[error("synth_oracle: {0}")]
    Synth(#[from] SynthError),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Name of the module the error originated in.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Report(_) => "report_parser",
            Error::Grid(_) => "env_grid",
            Error::Pipeline(_) => "fusion_pipeline",
            Error::Model(_) => "models",
            Error::Eval(_) => "evaluation",
            Error::Synth(_) => "synth_oracle",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
