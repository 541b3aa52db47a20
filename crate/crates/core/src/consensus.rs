//! Pooling of expert posteriors into a group consensus, and residual conflict.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::admiralty::{grade_weight, AdmiraltyGrade};

/// Tolerance on the unit sum of each expert posterior.
pub const POSTERIOR_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ConsensusError {
    #[error("no expert posteriors given")]
    Empty,
    #[error("conflict needs at least two experts, got {0}")]
    TooFewExperts(usize),
    #[error("expert `{expert}` has {got} states, expected {expected}")]
    LengthMismatch {
        expert: String,
        expected: usize,
        got: usize,
    },
    #[error("expert `{0}` has an invalid posterior")]
    InvalidPosterior(String),
    #[error("expert `{0}` has a negative or non-finite weight")]
    InvalidWeight(String),
    #[error("all expert weights are zero")]
    ZeroWeights,
}

/// Where an expert's pooling weight comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSource {
    Grade(AdmiraltyGrade),
    Explicit(f64),
}

impl WeightSource {
    pub fn weight(self) -> f64 {
        match self {
            Self::Grade(g) => grade_weight(g),
            Self::Explicit(w) => w,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertPosterior {
    pub expert: String,
    pub posterior: Vec<f64>,
    pub weight: WeightSource,
}

impl ExpertPosterior {
    pub fn new(expert: impl Into<String>, posterior: Vec<f64>, weight: WeightSource) -> Self {
        Self {
            expert: expert.into(),
            posterior,
            weight,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolMethod {
    #[default]
    Linear,
}

fn check(experts: &[ExpertPosterior]) -> Result<usize, ConsensusError> {
    let first = experts.first().ok_or(ConsensusError::Empty)?;
    let len = first.posterior.len();
    for e in experts {
        if e.posterior.len() != len {
            return Err(ConsensusError::LengthMismatch {
                expert: e.expert.clone(),
                expected: len,
                got: e.posterior.len(),
            });
        }
        let sum: f64 = e.posterior.iter().sum();
        if e.posterior.is_empty()
            || e.posterior.iter().any(|p| !(p.is_finite() && (0.0..=1.0).contains(p)))
            || (sum - 1.0).abs() > POSTERIOR_SUM_TOLERANCE
        {
            return Err(ConsensusError::InvalidPosterior(e.expert.clone()));
        }
        let w = e.weight.weight();
        if !(w.is_finite() && w >= 0.0) {
            return Err(ConsensusError::InvalidWeight(e.expert.clone()));
        }
    }
    Ok(len)
}

/// Weighted arithmetic mean of the experts' posteriors (linear opinion pool).
pub fn pool(experts: &[ExpertPosterior], method: PoolMethod) -> Result<Vec<f64>, ConsensusError> {
    let len = check(experts)?;
    let total: f64 = experts.iter().map(|e| e.weight.weight()).sum();
    if total <= 0.0 {
        return Err(ConsensusError::ZeroWeights);
    }
    // A unanimous panel returns its shared posterior untouched by rounding.
    if experts.iter().all(|e| e.posterior == experts[0].posterior) {
        return Ok(experts[0].posterior.clone());
    }
    match method {
        PoolMethod::Linear => {
            let mut pooled = vec![0.0; len];
            for e in experts {
                let w = e.weight.weight() / total;
                for (acc, p) in pooled.iter_mut().zip(&e.posterior) {
                    *acc += w * p;
                }
            }
            Ok(pooled)
        }
    }
}

/// Total-variation distance: half the L1 distance.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Largest pairwise total-variation distance between expert posteriors.
pub fn conflict(experts: &[ExpertPosterior]) -> Result<f64, ConsensusError> {
    if experts.len() < 2 {
        return Err(ConsensusError::TooFewExperts(experts.len()));
    }
    check(experts)?;
    let mut worst: f64 = 0.0;
    for (i, a) in experts.iter().enumerate() {
        for b in &experts[i + 1..] {
            worst = worst.max(total_variation(&a.posterior, &b.posterior));
        }
    }
    Ok(worst.min(1.0))
}
