//! Scenario service for epidss: persistent scenarios with graded evidence
//! logs, posterior and risk queries, what-if comparison and expert consensus.

pub mod engine;
pub mod error;
pub mod http;
pub mod scenario;
pub mod service;
pub mod store;

pub use engine::{EngineInfo, EngineKind, EXACT_WIDTH_LIMIT, SAMPLED_DRAWS};
pub use error::ServiceError;
pub use scenario::{EvidenceRecord, PosteriorSummary, Scenario};
pub use service::{
    consensus, Branch, ConsensusRequest, ConsensusResponse, CostModelReceipt, CreateScenario, EvidenceReceipt,
    PosteriorQuery, PosteriorResponse, ScenarioListing, Service, WhatIfRequest, WhatIfResponse,
};
pub use store::ScenarioStore;
