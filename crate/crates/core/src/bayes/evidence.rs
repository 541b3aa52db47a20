use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BayesError, CausalNetwork};

/// Observations on network variables.
///
/// Hard evidence fixes a state. Soft evidence attaches a likelihood vector
/// (non-negative, not all zero, not necessarily summing to one).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub hard: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub soft: BTreeMap<String, Vec<f64>>,
}

impl Evidence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn hard(variable: impl Into<String>, state: impl Into<String>) -> Self {
        Self::new().with_hard(variable, state)
    }

    pub fn soft(variable: impl Into<String>, likelihood: Vec<f64>) -> Self {
        Self::new().with_soft(variable, likelihood)
    }

    pub fn with_hard(mut self, variable: impl Into<String>, state: impl Into<String>) -> Self {
        self.hard.insert(variable.into(), state.into());
        self
    }

    pub fn with_soft(mut self, variable: impl Into<String>, likelihood: Vec<f64>) -> Self {
        self.soft.insert(variable.into(), likelihood);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.hard.is_empty() && self.soft.is_empty()
    }

    /// All variables mentioned, hard first.
    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.hard.keys().chain(self.soft.keys()).map(String::as_str)
    }

    /// Checks the evidence against `net` and returns one optional likelihood per
    /// variable index. Hard observations become one-hot vectors.
    pub fn likelihoods(&self, net: &CausalNetwork) -> Result<Vec<Option<Vec<f64>>>, BayesError> {
        let mut out = vec![None; net.len()];
        for (var, state) in &self.hard {
            let idx = net.index_of(var)?;
            let k = net.state_index(idx, state)?;
            let mut onehot = vec![0.0; net.cardinality(idx)];
            onehot[k] = 1.0;
            out[idx] = Some(onehot);
        }
        for (var, lik) in &self.soft {
            let idx = net.index_of(var)?;
            if out[idx].is_some() {
                return Err(BayesError::DuplicateEvidence(var.clone()));
            }
            check_likelihood(var, lik, net.cardinality(idx))?;
            out[idx] = Some(lik.clone());
        }
        Ok(out)
    }

    /// Conjunction of two evidence sets.
    ///
    /// Soft likelihoods on the same variable multiply; hard observations override
    /// soft ones unless the soft likelihood is zero at the observed state.
    /// Conflicting hard states are a contradiction.
    pub fn merge(&self, other: &Evidence, net: &CausalNetwork) -> Result<Evidence, BayesError> {
        let mut lik: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        let mut hard: BTreeMap<String, String> = BTreeMap::new();
        for ev in [self, other] {
            for (var, state) in &ev.hard {
                let idx = net.index_of(var)?;
                net.state_index(idx, state)?;
                match hard.get(var) {
                    Some(prev) if prev != state => return Err(BayesError::ContradictoryEvidence),
                    _ => {
                        hard.insert(var.clone(), state.clone());
                    }
                }
            }
            for (var, l) in &ev.soft {
                let idx = net.index_of(var)?;
                check_likelihood(var, l, net.cardinality(idx))?;
                match lik.get_mut(var) {
                    Some(acc) => acc.iter_mut().zip(l).for_each(|(a, b)| *a *= b),
                    None => {
                        lik.insert(var.clone(), l.clone());
                    }
                }
            }
        }
        let mut merged = Evidence {
            hard,
            soft: BTreeMap::new(),
        };
        for (var, l) in lik {
            if let Some(state) = merged.hard.get(&var) {
                let idx = net.index_of(&var)?;
                if l[net.state_index(idx, state)?] <= 0.0 {
                    return Err(BayesError::ContradictoryEvidence);
                }
                continue;
            }
            if l.iter().all(|&x| x == 0.0) {
                return Err(BayesError::ContradictoryEvidence);
            }
            merged.soft.insert(var, l);
        }
        Ok(merged)
    }
}

pub(crate) fn check_likelihood(var: &str, lik: &[f64], card: usize) -> Result<(), BayesError> {
    if lik.len() != card {
        return Err(BayesError::LikelihoodLength {
            variable: var.to_owned(),
            expected: card,
            got: lik.len(),
        });
    }
    if lik.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || lik.iter().all(|&x| x == 0.0) {
        return Err(BayesError::InvalidLikelihood(var.to_owned()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::NetworkBuilder;

    fn net() -> CausalNetwork {
        NetworkBuilder::new()
            .variable("a", ["x", "y"])
            .variable("b", ["x", "y", "z"])
            .table("a", vec![vec![0.5, 0.5]])
            .table("b", vec![vec![0.2, 0.3, 0.5]])
            .build()
            .unwrap()
    }

    #[test]
    fn likelihoods_validate() {
        let net = net();
        let ev = Evidence::hard("a", "y").with_soft("b", vec![1.0, 2.0, 0.0]);
        let l = ev.likelihoods(&net).unwrap();
        assert_eq!(l[0].as_deref(), Some(&[0.0, 1.0][..]));
        assert_eq!(l[1].as_deref(), Some(&[1.0, 2.0, 0.0][..]));

        let both = Evidence::hard("a", "x").with_soft("a", vec![1.0, 1.0]);
        assert!(matches!(both.likelihoods(&net), Err(BayesError::DuplicateEvidence(_))));
        let short = Evidence::soft("b", vec![1.0, 1.0]);
        assert!(matches!(
            short.likelihoods(&net),
            Err(BayesError::LikelihoodLength { .. })
        ));
        let zero = Evidence::soft("a", vec![0.0, 0.0]);
        assert!(matches!(zero.likelihoods(&net), Err(BayesError::InvalidLikelihood(_))));
        let neg = Evidence::soft("a", vec![-1.0, 1.0]);
        assert!(neg.likelihoods(&net).is_err());
        assert!(Evidence::hard("q", "x").likelihoods(&net).is_err());
        assert!(Evidence::hard("a", "w").likelihoods(&net).is_err());
    }

    #[test]
    fn merge_rules() {
        let net = net();
        let a = Evidence::soft("b", vec![1.0, 0.5, 0.5]);
        let b = Evidence::soft("b", vec![0.5, 1.0, 0.0]);
        let m = a.merge(&b, &net).unwrap();
        assert_eq!(m.soft["b"], vec![0.5, 0.5, 0.0]);

        let h = Evidence::hard("b", "y");
        let m = m.merge(&h, &net).unwrap();
        assert_eq!(m.hard["b"], "y");
        assert!(m.soft.is_empty());

        let zero_at_obs = Evidence::soft("b", vec![1.0, 1.0, 0.0]).merge(&Evidence::hard("b", "z"), &net);
        assert!(matches!(zero_at_obs, Err(BayesError::ContradictoryEvidence)));
        let conflict = Evidence::hard("a", "x").merge(&Evidence::hard("a", "y"), &net);
        assert!(matches!(conflict, Err(BayesError::ContradictoryEvidence)));
        let cancel = Evidence::soft("a", vec![1.0, 0.0]).merge(&Evidence::soft("a", vec![0.0, 1.0]), &net);
        assert!(matches!(cancel, Err(BayesError::ContradictoryEvidence)));
    }
}
