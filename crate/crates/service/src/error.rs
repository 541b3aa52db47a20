use std::io;
use std::path::PathBuf;

use epidss_core::bayes::{BayesError, ValidationReport};
use epidss_core::consensus::ConsensusError;
use epidss_core::risk::RiskError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("scenario `{0}` not found")]
    NotFound(String),
    #[error("invalid scenario id `{0}`")]
    InvalidId(String),
    #[error("invalid network: {0}")]
    InvalidNetwork(ValidationReport),
    #[error("evidence rejected: {0}")]
    Contradictory(String),
    #[error("scenario `{scenario}` has no revision {requested} (current {current})")]
    UnknownRevision {
        scenario: String,
        requested: u64,
        current: u64,
    },
    #[error("scenario has no cost model `{0}`")]
    UnknownCostModel(String),
    #[error(transparent)]
    Bayes(BayesError),
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error(transparent)]
    Consensus(#[from] ConsensusError),
    #[error("corrupt scenario file {path}: {source}")]
    Corrupt { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl From<BayesError> for ServiceError {
    fn from(e: BayesError) -> Self {
        match e {
            BayesError::InvalidNetwork(report) => Self::InvalidNetwork(report),
            BayesError::ContradictoryEvidence | BayesError::ZeroWeights(_) => Self::Contradictory(e.to_string()),
            other => Self::Bayes(other),
        }
    }
}
