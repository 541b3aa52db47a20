//! Discrete Bayesian causal networks: representation, validation, exact and
//! sampled inference, and virtual evidence.

mod evidence;
mod exact;
mod factor;
pub mod generate;
mod network;
mod sampling;
mod soft;

use thiserror::Error;

pub use evidence::Evidence;
pub use exact::{elimination_order, elimination_width, evidence_probability, posterior_exact, posterior_marginals};
pub use network::{
    validate_network, CausalNetwork, CutDocument, NetworkBuilder, NetworkDocument, RowDrift, ValidationReport,
    Variable, Violation, KEY_SEPARATOR, RENORMALIZE_WARN_DRIFT, ROW_SUM_TOLERANCE,
};
pub use sampling::{marginals_sampled, posterior_sampled, SampledPosterior, SAMPLING_STREAMS};
pub use soft::{apply_soft_evidence, VirtualEvidence, VIRTUAL_STATES};

#[derive(Debug, Error)]
pub enum BayesError {
    #[error("invalid network: {0}")]
    InvalidNetwork(ValidationReport),
    #[error("malformed network document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{variable}` has no state `{state}`")]
    UnknownState { variable: String, state: String },
    #[error("variable `{variable}` has no table row `{row}`")]
    UnknownRow { variable: String, row: String },
    #[error("assignment is missing variable `{0}`")]
    MissingAssignment(String),
    #[error("variable `{0}` has both hard and soft evidence")]
    DuplicateEvidence(String),
    #[error("likelihood for `{variable}` has {got} entries, expected {expected}")]
    LikelihoodLength {
        variable: String,
        expected: usize,
        got: usize,
    },
    #[error("likelihood for `{0}` must be finite, non-negative and not all zero")]
    InvalidLikelihood(String),
    #[error("query variable `{0}` has hard evidence")]
    QueryObserved(String),
    #[error("contradictory evidence: the evidence has zero probability under the network")]
    ContradictoryEvidence,
    #[error("all {0} sample weights are zero: the evidence is unreachable by forward sampling")]
    ZeroWeights(usize),
    #[error("at least one sample is required")]
    NoSamples,
}
