//! Virtual (soft) evidence as an auxiliary observed child node.

use super::evidence::check_likelihood;
use super::{BayesError, CausalNetwork, Evidence};

/// State labels of a virtual evidence node.
pub const VIRTUAL_STATES: [&str; 2] = ["observed", "unobserved"];

/// A network extended with one virtual evidence node, and the hard evidence
/// that activates it.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualEvidence {
    pub network: CausalNetwork,
    pub node: String,
    pub evidence: Evidence,
}

/// Adds a binary child of `variable` whose "observed" column is the
/// sum-normalized likelihood. Observing that child reproduces soft evidence
/// with the given likelihood.
pub fn apply_soft_evidence(
    net: &CausalNetwork,
    variable: &str,
    likelihood: &[f64],
) -> Result<VirtualEvidence, BayesError> {
    let var = net.index_of(variable)?;
    check_likelihood(variable, likelihood, net.cardinality(var))?;
    let total: f64 = likelihood.iter().sum();

    let mut doc = net.to_document();
    let mut k = 0;
    let node = loop {
        let candidate = format!("virtual:{variable}:{k}");
        if net.get(&candidate).is_none() {
            break candidate;
        }
        k += 1;
    };
    let parent = net.variable(var);
    doc.variables.push(super::Variable::new(node.clone(), VIRTUAL_STATES));
    doc.edges.push((variable.to_owned(), node.clone()));
    doc.cuts.push(super::CutDocument {
        variable: node.clone(),
        parents: Some(vec![variable.to_owned()]),
        rows: parent
            .states
            .iter()
            .zip(likelihood)
            .map(|(s, l)| {
                let p = l / total;
                (s.clone(), vec![p, 1.0 - p])
            })
            .collect(),
    });
    Ok(VirtualEvidence {
        network: CausalNetwork::from_document(&doc)?,
        evidence: Evidence::hard(node.clone(), VIRTUAL_STATES[0]),
        node,
    })
}
