//! Risk, bias and tail measures over posteriors, and sequential re-assessment
//! as graded evidence arrives.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::admiralty::{discount_to_likelihood, GradedEvidence};
use crate::bayes::{posterior_exact, BayesError, CausalNetwork, Evidence, Variable};

/// Threshold below which a mean error is reported as no bias.
pub const BIAS_TOLERANCE: f64 = 1e-9;

/// Quantile used for the tail of a [`RiskAssessment`] unless another is requested.
pub const DEFAULT_TAIL_QUANTILE: f64 = 0.95;

#[derive(Debug, Error)]
pub enum RiskError {
    #[error("cost model is for `{model}`, not `{variable}`")]
    WrongVariable { model: String, variable: String },
    #[error("state `{0}` has no cost")]
    UnpricedState(String),
    #[error("cost of `{0}` must be finite and non-negative")]
    InvalidCost(String),
    #[error("posterior has {got} entries, variable has {expected} states")]
    PosteriorLength { expected: usize, got: usize },
    #[error("quantile must lie strictly between 0 and 1, got {0}")]
    InvalidQuantile(f64),
    #[error("at least one sample is required")]
    EmptySamples,
    #[error("samples must be finite")]
    NonFiniteSample,
    #[error("observation {index}: {source}")]
    Observation {
        index: usize,
        #[source]
        source: BayesError,
    },
}

/// Non-negative cost of each state of one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub variable: String,
    pub costs: BTreeMap<String, f64>,
}

impl CostModel {
    pub fn new<I, S>(variable: impl Into<String>, costs: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        Self {
            variable: variable.into(),
            costs: costs.into_iter().map(|(s, c)| (s.into(), c)).collect(),
        }
    }

    /// Costs aligned with the variable's states.
    pub fn aligned(&self, variable: &Variable) -> Result<Vec<f64>, RiskError> {
        if self.variable != variable.id {
            return Err(RiskError::WrongVariable {
                model: self.variable.clone(),
                variable: variable.id.clone(),
            });
        }
        variable
            .states
            .iter()
            .map(|s| {
                let c = *self.costs.get(s).ok_or_else(|| RiskError::UnpricedState(s.clone()))?;
                if !(c.is_finite() && c >= 0.0) {
                    return Err(RiskError::InvalidCost(s.clone()));
                }
                Ok(c)
            })
            .collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            variable: self.variable.clone(),
            costs: self.costs.iter().map(|(s, c)| (s.clone(), c * factor)).collect(),
        }
    }
}

/// Combines the cost of a state with its probability.
pub trait RiskFunction {
    fn contribution(&self, cost: f64, probability: f64) -> f64;
}

/// Expected cost: `cost * probability`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExpectedCost;

impl RiskFunction for ExpectedCost {
    fn contribution(&self, cost: f64, probability: f64) -> f64 {
        cost * probability
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRisk {
    pub state: String,
    pub probability: f64,
    pub cost: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskAssessment {
    pub variable: String,
    pub risk: f64,
    pub contributions: Vec<StateRisk>,
    pub tail_quantile: f64,
    /// Expected shortfall of the cost distribution at `tail_quantile`.
    pub tail_risk: f64,
    pub posterior: Vec<f64>,
}

/// Expected-cost risk of `variable` under `posterior`, with its tail at the default quantile.
pub fn risk_score(cost: &CostModel, variable: &Variable, posterior: &[f64]) -> Result<RiskAssessment, RiskError> {
    risk_score_with(&ExpectedCost, cost, variable, posterior, DEFAULT_TAIL_QUANTILE)
}

pub fn risk_score_with<F: RiskFunction>(
    f: &F,
    cost: &CostModel,
    variable: &Variable,
    posterior: &[f64],
    tail_quantile: f64,
) -> Result<RiskAssessment, RiskError> {
    if posterior.len() != variable.cardinality() {
        return Err(RiskError::PosteriorLength {
            expected: variable.cardinality(),
            got: posterior.len(),
        });
    }
    if !(tail_quantile > 0.0 && tail_quantile < 1.0) {
        return Err(RiskError::InvalidQuantile(tail_quantile));
    }
    let costs = cost.aligned(variable)?;
    let contributions: Vec<StateRisk> = variable
        .states
        .iter()
        .zip(&costs)
        .zip(posterior)
        .map(|((s, &c), &p)| StateRisk {
            state: s.clone(),
            probability: p,
            cost: c,
            contribution: f.contribution(c, p),
        })
        .collect();
    Ok(RiskAssessment {
        variable: variable.id.clone(),
        risk: contributions.iter().map(|c| c.contribution).sum(),
        tail_risk: discrete_expected_shortfall(&costs, posterior, tail_quantile),
        tail_quantile,
        contributions,
        posterior: posterior.to_vec(),
    })
}

/// Mean cost over the worst `1 - q` probability mass of a discrete distribution.
fn discrete_expected_shortfall(costs: &[f64], probs: &[f64], q: f64) -> f64 {
    let mut order: Vec<usize> = (0..costs.len()).collect();
    order.sort_by(|&a, &b| costs[b].total_cmp(&costs[a]));
    let tail = 1.0 - q;
    let mut remaining = tail;
    let mut acc = 0.0;
    for i in order {
        if remaining <= 0.0 {
            break;
        }
        let take = probs[i].min(remaining);
        acc += take * costs[i];
        remaining -= take;
    }
    acc / (tail - remaining.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasDirection {
    Over,
    Under,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub mean_error: f64,
    pub direction: BiasDirection,
    pub sample_count: usize,
    /// Standard error of the mean estimate (zero for a single estimate).
    pub standard_error: f64,
}

/// Signed mean error of `estimates` against `reference`.
pub fn bias_estimate(estimates: &[f64], reference: f64) -> Result<BiasReport, RiskError> {
    if estimates.is_empty() {
        return Err(RiskError::EmptySamples);
    }
    if estimates.iter().any(|x| !x.is_finite()) || !reference.is_finite() {
        return Err(RiskError::NonFiniteSample);
    }
    let n = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / n;
    let mean_error = mean - reference;
    let standard_error = if estimates.len() > 1 {
        let var = estimates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    let direction = if mean_error > BIAS_TOLERANCE {
        BiasDirection::Over
    } else if mean_error < -BIAS_TOLERANCE {
        BiasDirection::Under
    } else {
        BiasDirection::None
    };
    Ok(BiasReport {
        mean_error,
        direction,
        sample_count: estimates.len(),
        standard_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRisk {
    /// Mean of the samples at or above the quantile.
    pub value: f64,
    /// Empirical quantile by linear interpolation between order statistics.
    pub quantile: f64,
    /// Set when too few samples were available to interpolate; `value` is then the maximum.
    pub fell_back_to_max: bool,
}

/// Expected shortfall of `samples` at level `q`.
///
/// The quantile is interpolated at position `(n - 1) q` of the sorted sample;
/// the result averages every sample greater than or equal to it.
pub fn tail_risk(samples: &[f64], q: f64) -> Result<TailRisk, RiskError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(RiskError::InvalidQuantile(q));
    }
    if samples.is_empty() {
        return Err(RiskError::EmptySamples);
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(RiskError::NonFiniteSample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n < 2 {
        log::warn!("tail risk from a single sample; using the maximum");
        return Ok(TailRisk {
            value: sorted[0],
            quantile: sorted[0],
            fell_back_to_max: true,
        });
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let quantile = sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]);
    let start = sorted.partition_point(|&x| x < quantile);
    let tail = &sorted[start..];
    Ok(TailRisk {
        value: tail.iter().sum::<f64>() / tail.len() as f64,
        quantile,
        fell_back_to_max: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSnapshot {
    /// Number of observations applied.
    pub applied: usize,
    pub posterior: Vec<f64>,
}

/// Posterior of `query` after each observation in turn, each discounted by its grade.
///
/// The first snapshot is the prior; the last equals [`batch_adjust`] on the
/// same observations.
pub fn sequential_adjust(
    net: &CausalNetwork,
    observations: &[GradedEvidence],
    query: &str,
) -> Result<Vec<PosteriorSnapshot>, RiskError> {
    let at = |index: usize| move |source: BayesError| RiskError::Observation { index, source };
    let mut snapshots = vec![PosteriorSnapshot {
        applied: 0,
        posterior: posterior_exact(net, &Evidence::new(), query).map_err(at(0))?,
    }];
    let mut combined = Evidence::new();
    for (i, obs) in observations.iter().enumerate() {
        let soft = discount_to_likelihood(net, obs).map_err(at(i))?;
        combined = combined.merge(&soft, net).map_err(at(i))?;
        snapshots.push(PosteriorSnapshot {
            applied: i + 1,
            posterior: posterior_exact(net, &combined, query).map_err(at(i))?,
        });
    }
    Ok(snapshots)
}

/// Posterior of `query` after applying every observation at once.
pub fn batch_adjust(net: &CausalNetwork, observations: &[GradedEvidence], query: &str) -> Result<Vec<f64>, RiskError> {
    let mut combined = Evidence::new();
    for (i, obs) in observations.iter().enumerate() {
        let soft = discount_to_likelihood(net, obs).map_err(|source| RiskError::Observation { index: i, source })?;
        combined = combined
            .merge(&soft, net)
            .map_err(|source| RiskError::Observation { index: i, source })?;
    }
    posterior_exact(net, &combined, query).map_err(|source| RiskError::Observation {
        index: observations.len().saturating_sub(1),
        source,
    })
}
