//! Choice between exact and sampled inference for a scenario network.

use std::collections::BTreeMap;

use epidss_core::bayes::{
    elimination_width, evidence_probability, marginals_sampled, posterior_exact, posterior_marginals,
    posterior_sampled, BayesError, CausalNetwork, Evidence,
};
use serde::{Deserialize, Serialize};

/// Networks whose elimination width exceeds this are queried by sampling.
pub const EXACT_WIDTH_LIMIT: usize = 20;
pub const SAMPLED_DRAWS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    Exact,
    Sampled,
}

/// Engine settings, echoed in every response that carries a probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineInfo {
    pub kind: EngineKind,
    pub elimination_width: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
}

impl EngineInfo {
    pub fn select(net: &CausalNetwork, seed: u64) -> Self {
        let width = elimination_width(net);
        let sampled = width > EXACT_WIDTH_LIMIT;
        Self {
            kind: if sampled {
                EngineKind::Sampled
            } else {
                EngineKind::Exact
            },
            elimination_width: width,
            seed,
            n_samples: sampled.then_some(SAMPLED_DRAWS),
        }
    }

    /// Posterior of `query`; a hard-observed query comes back one-hot.
    pub fn posterior(&self, net: &CausalNetwork, ev: &Evidence, query: &str) -> Result<Vec<f64>, BayesError> {
        if ev.hard.contains_key(query) {
            self.check_reachable(net, ev)?;
            return one_hot(net, query, &ev.hard[query]);
        }
        match self.kind {
            EngineKind::Exact => posterior_exact(net, ev, query),
            EngineKind::Sampled => Ok(posterior_sampled(net, ev, query, self.draws(), self.seed)?.probabilities),
        }
    }

    /// Posterior of every variable.
    pub fn marginals(&self, net: &CausalNetwork, ev: &Evidence) -> Result<BTreeMap<String, Vec<f64>>, BayesError> {
        match self.kind {
            EngineKind::Exact => posterior_marginals(net, ev),
            EngineKind::Sampled => {
                let mut out = if ev.hard.len() < net.len() {
                    marginals_sampled(net, ev, self.draws(), self.seed)?
                        .into_iter()
                        .map(|(k, s)| (k, s.probabilities))
                        .collect()
                } else {
                    self.check_reachable(net, ev)?;
                    BTreeMap::new()
                };
                for (var, state) in &ev.hard {
                    out.insert(var.clone(), one_hot(net, var, state)?);
                }
                Ok(out)
            }
        }
    }

    fn draws(&self) -> usize {
        self.n_samples.unwrap_or(SAMPLED_DRAWS)
    }

    fn check_reachable(&self, net: &CausalNetwork, ev: &Evidence) -> Result<(), BayesError> {
        match self.kind {
            EngineKind::Exact => {
                if evidence_probability(net, ev)? > 0.0 {
                    Ok(())
                } else {
                    Err(BayesError::ContradictoryEvidence)
                }
            }
            // sampling any unobserved variable fails on zero total weight
            EngineKind::Sampled => match net.variables().iter().find(|v| !ev.hard.contains_key(&v.id)) {
                Some(v) => posterior_sampled(net, ev, &v.id, self.draws(), self.seed).map(|_| ()),
                None => {
                    let assignment: BTreeMap<&str, &str> =
                        ev.hard.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
                    if net.joint_probability(&assignment)? > 0.0 {
                        Ok(())
                    } else {
                        Err(BayesError::ContradictoryEvidence)
                    }
                }
            },
        }
    }
}

fn one_hot(net: &CausalNetwork, var: &str, state: &str) -> Result<Vec<f64>, BayesError> {
    let v = net.index_of(var)?;
    let k = net.state_index(v, state)?;
    Ok((0..net.cardinality(v))
        .map(|s| if s == k { 1.0 } else { 0.0 })
        .collect())
}
