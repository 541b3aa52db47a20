use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use epidss_core::admiralty::{discount_to_likelihood, GradedEvidence};
use epidss_core::bayes::{CausalNetwork, Evidence, NetworkDocument};
use epidss_core::risk::CostModel;
use serde::{Deserialize, Serialize};

use crate::engine::EngineInfo;
use crate::error::ServiceError;

/// One entry of the append-only evidence log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceRecord {
    /// Revision created by appending this entry.
    pub revision: u64,
    #[serde(flatten)]
    pub graded: GradedEvidence,
}

/// Marginals of every variable after applying the evidence log up to `revision`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub revision: u64,
    pub evidence_count: usize,
    pub engine: EngineInfo,
    pub marginals: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub name: String,
    pub network: NetworkDocument,
    #[serde(default)]
    pub evidence: Vec<EvidenceRecord>,
    #[serde(default)]
    pub cost_models: BTreeMap<String, CostModel>,
    pub created: DateTime<Utc>,
    pub updated: DateTime<Utc>,
    pub revision: u64,
    pub seed: u64,
    pub summary: PosteriorSummary,
}

impl Scenario {
    pub fn causal_network(&self) -> Result<CausalNetwork, ServiceError> {
        Ok(CausalNetwork::from_document(&self.network)?)
    }

    /// Log entries in effect at `revision`.
    pub fn evidence_at(&self, revision: u64) -> Result<&[EvidenceRecord], ServiceError> {
        if revision == 0 || revision > self.revision {
            return Err(ServiceError::UnknownRevision {
                scenario: self.id.clone(),
                requested: revision,
                current: self.revision,
            });
        }
        let n = self.evidence.partition_point(|r| r.revision <= revision);
        Ok(&self.evidence[..n])
    }

    pub fn cost_model(&self, name: &str) -> Result<&CostModel, ServiceError> {
        self.cost_models
            .get(name)
            .ok_or_else(|| ServiceError::UnknownCostModel(name.to_owned()))
    }
}

/// Discounts each logged observation by its grade and merges them in log order.
pub fn combined_evidence<'a>(
    net: &CausalNetwork,
    log: impl IntoIterator<Item = &'a GradedEvidence>,
) -> Result<Evidence, ServiceError> {
    let mut combined = Evidence::new();
    for graded in log {
        let soft = discount_to_likelihood(net, graded)?;
        combined = combined.merge(&soft, net)?;
    }
    Ok(combined)
}

/// Recomputes the posterior summary from the log alone.
pub fn summarize<'a>(
    net: &CausalNetwork,
    engine: &EngineInfo,
    revision: u64,
    log: impl IntoIterator<Item = &'a GradedEvidence>,
) -> Result<PosteriorSummary, ServiceError> {
    let log: Vec<&GradedEvidence> = log.into_iter().collect();
    let evidence = combined_evidence(net, log.iter().copied())?;
    Ok(PosteriorSummary {
        revision,
        evidence_count: log.len(),
        engine: *engine,
        marginals: engine.marginals(net, &evidence)?,
    })
}
