//! Scenario operations shared by the HTTP API and the CLI.

use chrono::Utc;
use epidss_core::admiralty::GradedEvidence;
use epidss_core::bayes::{validate_network, CausalNetwork, Evidence, NetworkDocument};
use epidss_core::consensus::{conflict, pool, ExpertPosterior, PoolMethod};
use epidss_core::risk::{risk_score, CostModel, RiskAssessment};
use serde::{Deserialize, Serialize};

use crate::engine::EngineInfo;
use crate::error::ServiceError;
use crate::scenario::{combined_evidence, summarize, EvidenceRecord, PosteriorSummary, Scenario};
use crate::store::ScenarioStore;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateScenario {
    pub name: String,
    pub network: NetworkDocument,
    /// Engine seed; drawn at random when absent.
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceReceipt {
    pub scenario: String,
    pub revision: u64,
    pub summary: PosteriorSummary,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PosteriorQuery {
    pub variable: String,
    /// Defaults to the current revision.
    #[serde(default)]
    pub revision: Option<u64>,
    #[serde(default)]
    pub cost_model: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorResponse {
    pub scenario: String,
    pub revision: u64,
    pub variable: String,
    pub states: Vec<String>,
    pub posterior: Vec<f64>,
    pub engine: EngineInfo,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub risk: Option<RiskAssessment>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct WhatIfRequest {
    /// Hypothetical observations layered on the stored evidence.
    #[serde(default)]
    pub delta: Evidence,
    pub query: String,
    #[serde(default)]
    pub cost_model: Option<String>,
}

/// One side of a what-if comparison. Exactly one of `posterior` and `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posterior: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub risk: Option<RiskAssessment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfResponse {
    pub scenario: String,
    pub revision: u64,
    pub query: String,
    pub states: Vec<String>,
    pub engine: EngineInfo,
    pub baseline: Branch,
    pub hypothetical: Branch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModelReceipt {
    pub scenario: String,
    pub revision: u64,
    pub name: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConsensusRequest {
    pub experts: Vec<ExpertPosterior>,
    #[serde(default)]
    pub method: PoolMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusResponse {
    pub pooled: Vec<f64>,
    /// Largest pairwise total-variation distance; absent for a single expert.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conflict: Option<f64>,
    pub method: PoolMethod,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioListing {
    pub id: String,
    pub name: String,
    pub revision: u64,
}

#[derive(Debug)]
pub struct Service {
    store: ScenarioStore,
}

fn new_id() -> String {
    format!("sc-{:016x}", rand::random::<u64>())
}

impl Service {
    pub fn new(store: ScenarioStore) -> Self {
        Self { store }
    }

    pub fn open(dir: impl Into<std::path::PathBuf>) -> Result<Self, ServiceError> {
        Ok(Self::new(ScenarioStore::open(dir)?))
    }

    pub fn store(&self) -> &ScenarioStore {
        &self.store
    }

    pub fn create_scenario(&self, req: CreateScenario) -> Result<Scenario, ServiceError> {
        let report = validate_network(&req.network);
        if !report.is_valid() {
            return Err(ServiceError::InvalidNetwork(report));
        }
        let net = CausalNetwork::from_document(&req.network)?;
        let seed = req.seed.unwrap_or_else(rand::random);
        let engine = EngineInfo::select(&net, seed);
        let now = Utc::now();
        let scenario = Scenario {
            id: new_id(),
            name: req.name,
            network: req.network,
            evidence: Vec::new(),
            cost_models: Default::default(),
            created: now,
            updated: now,
            revision: 1,
            seed,
            summary: summarize(&net, &engine, 1, [])?,
        };
        self.store.insert(&scenario)?;
        log::info!("created scenario {} ({})", scenario.id, scenario.name);
        Ok(scenario)
    }

    pub fn scenario(&self, id: &str) -> Result<Scenario, ServiceError> {
        self.store.load(id)
    }

    pub fn list(&self) -> Result<Vec<ScenarioListing>, ServiceError> {
        self.store
            .list()?
            .into_iter()
            .map(|id| {
                let s = self.store.load(&id)?;
                Ok(ScenarioListing {
                    id: s.id,
                    name: s.name,
                    revision: s.revision,
                })
            })
            .collect()
    }

    /// Appends graded evidence and recomputes the summary. Evidence that makes
    /// the log contradictory is rejected and nothing is stored.
    pub fn submit_evidence(&self, id: &str, graded: GradedEvidence) -> Result<EvidenceReceipt, ServiceError> {
        self.store.update(id, |s| {
            let net = s.causal_network()?;
            let engine = EngineInfo::select(&net, s.seed);
            let revision = s.revision + 1;
            let log = s.evidence.iter().map(|r| &r.graded).chain([&graded]);
            let summary = summarize(&net, &engine, revision, log)?;
            s.evidence.push(EvidenceRecord { revision, graded });
            s.revision = revision;
            s.updated = Utc::now();
            s.summary = summary.clone();
            Ok(EvidenceReceipt {
                scenario: s.id.clone(),
                revision,
                summary,
            })
        })
    }

    /// Adds or replaces a named cost model.
    pub fn set_cost_model(&self, id: &str, name: &str, model: CostModel) -> Result<CostModelReceipt, ServiceError> {
        self.store.update(id, |s| {
            let net = s.causal_network()?;
            let var = net.index_of(&model.variable)?;
            model.aligned(net.variable(var))?;
            s.cost_models.insert(name.to_owned(), model);
            s.revision += 1;
            s.summary.revision = s.revision;
            s.updated = Utc::now();
            Ok(CostModelReceipt {
                scenario: s.id.clone(),
                revision: s.revision,
                name: name.to_owned(),
            })
        })
    }

    /// Posterior of one variable at any recorded revision.
    pub fn posterior(&self, id: &str, q: &PosteriorQuery) -> Result<PosteriorResponse, ServiceError> {
        let s = self.store.load(id)?;
        let revision = q.revision.unwrap_or(s.revision);
        let net = s.causal_network()?;
        let engine = EngineInfo::select(&net, s.seed);
        let log = s.evidence_at(revision)?;
        let evidence = combined_evidence(&net, log.iter().map(|r| &r.graded))?;
        let posterior = engine.posterior(&net, &evidence, &q.variable)?;
        let var = net.get(&q.variable).expect("posterior checked the variable");
        let risk = match &q.cost_model {
            Some(name) => Some(risk_score(s.cost_model(name)?, var, &posterior)?),
            None => None,
        };
        Ok(PosteriorResponse {
            scenario: s.id.clone(),
            revision,
            variable: q.variable.clone(),
            states: var.states.clone(),
            posterior,
            engine,
            risk,
        })
    }

    /// Baseline and hypothetical posteriors side by side. Never writes.
    pub fn what_if(&self, id: &str, req: &WhatIfRequest) -> Result<WhatIfResponse, ServiceError> {
        let s = self.store.load(id)?;
        let net = s.causal_network()?;
        let engine = EngineInfo::select(&net, s.seed);
        let var = net.variable(net.index_of(&req.query)?);
        let cost = match &req.cost_model {
            Some(name) => Some(s.cost_model(name)?),
            None => None,
        };
        let baseline_ev = combined_evidence(&net, s.evidence.iter().map(|r| &r.graded))?;

        let branch = |ev: Result<Evidence, ServiceError>| -> Branch {
            let result = ev.and_then(|ev| {
                let posterior = engine.posterior(&net, &ev, &req.query)?;
                let risk = cost.map(|c| risk_score(c, var, &posterior)).transpose()?;
                Ok((posterior, risk))
            });
            match result {
                Ok((posterior, risk)) => Branch {
                    posterior: Some(posterior),
                    risk,
                    error: None,
                },
                Err(e) => Branch {
                    posterior: None,
                    risk: None,
                    error: Some(e.to_string()),
                },
            }
        };
        let hypothetical_ev = baseline_ev.merge(&req.delta, &net).map_err(ServiceError::from);
        Ok(WhatIfResponse {
            scenario: s.id.clone(),
            revision: s.revision,
            query: req.query.clone(),
            states: var.states.clone(),
            engine,
            baseline: branch(Ok(baseline_ev.clone())),
            hypothetical: branch(hypothetical_ev),
        })
    }

    /// Recomputes the summary at the current revision from the evidence log alone.
    pub fn replay(&self, id: &str) -> Result<PosteriorSummary, ServiceError> {
        let s = self.store.load(id)?;
        let net = s.causal_network()?;
        let engine = EngineInfo::select(&net, s.seed);
        summarize(&net, &engine, s.revision, s.evidence.iter().map(|r| &r.graded))
    }
}

pub fn consensus(req: &ConsensusRequest) -> Result<ConsensusResponse, ServiceError> {
    let pooled = pool(&req.experts, req.method)?;
    let conflict = if req.experts.len() >= 2 {
        Some(conflict(&req.experts)?)
    } else {
        None
    };
    Ok(ConsensusResponse {
        pooled,
        conflict,
        method: req.method,
    })
}
