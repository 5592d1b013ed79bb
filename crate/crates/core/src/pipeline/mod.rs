//! Stage orchestration: each stage reads the previous stage's artifacts,
//! writes its own atomically and records a manifest with input hashes,
//! a config echo and timings.

mod config;
mod graphml;
mod stages;

pub use config::{CommunitySection, InputPaths, NormalizationSection, PipelineConfig, ValidationSection};
pub use graphml::write_graphml;
pub use stages::{run, Stage};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("stage {stage} requires missing artifact {missing} (run the `{produced_by}` stage first)")]
    StageDependency {
        stage: &'static str,
        missing: std::path::PathBuf,
        produced_by: &'static str,
    },
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl PipelineError {
    /// CLI exit code: 2 config, 3 data, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Numerical(_) => 4,
            _ => 3,
        }
    }
}

impl From<crate::bicm::BicmError> for PipelineError {
    fn from(e: crate::bicm::BicmError) -> Self {
        match e {
            crate::bicm::BicmError::SolverDiverged { .. } => PipelineError::Numerical(e.to_string()),
            other => PipelineError::Data(other.to_string()),
        }
    }
}

macro_rules! data_error {
    ($($ty:ty),*) => {
        $(impl From<$ty> for PipelineError {
            fn from(e: $ty) -> Self {
                PipelineError::Data(e.to_string())
            }
        })*
    };
}

data_error!(
    crate::graph::GraphError,
    crate::normalize::NormalizeError,
    crate::validation::ValidationError,
    crate::communities::CommunityError,
    crate::csr::CsrError,
    crate::ranks::RankError,
    crate::ingest::IngestError,
    serde_json::Error
);
