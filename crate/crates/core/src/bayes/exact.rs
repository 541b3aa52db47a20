//! Exact inference by variable elimination with a min-fill ordering.

use std::collections::{BTreeMap, BTreeSet};

use super::factor::Factor;
use super::{BayesError, CausalNetwork, Evidence};

/// Normalized belief of `query` given `evidence`, by variable elimination.
///
/// The query must not carry hard evidence. Evidence with zero probability is
/// reported as [`BayesError::ContradictoryEvidence`].
pub fn posterior_exact(net: &CausalNetwork, evidence: &Evidence, query: &str) -> Result<Vec<f64>, BayesError> {
    let q = net.index_of(query)?;
    if evidence.hard.contains_key(query) {
        return Err(BayesError::QueryObserved(query.to_owned()));
    }
    let lik = evidence.likelihoods(net)?;
    normalize(unnormalized_marginal(net, &lik, q))
}

/// Posterior marginals of every variable. Hard-observed variables come back one-hot.
pub fn posterior_marginals(net: &CausalNetwork, evidence: &Evidence) -> Result<BTreeMap<String, Vec<f64>>, BayesError> {
    let lik = evidence.likelihoods(net)?;
    (0..net.len())
        .map(|v| {
            Ok((
                net.variable(v).id.clone(),
                normalize(unnormalized_marginal(net, &lik, v))?,
            ))
        })
        .collect()
}

/// Probability of the evidence; soft likelihoods enter as unnormalized weights.
pub fn evidence_probability(net: &CausalNetwork, evidence: &Evidence) -> Result<f64, BayesError> {
    let lik = evidence.likelihoods(net)?;
    let Some(anchor) = lik.iter().position(Option::is_some) else {
        return Ok(1.0);
    };
    Ok(unnormalized_marginal(net, &lik, anchor).iter().sum())
}

pub(crate) fn normalize(mut v: Vec<f64>) -> Result<Vec<f64>, BayesError> {
    let z: f64 = v.iter().sum();
    if !(z.is_finite() && z > 0.0) {
        return Err(BayesError::ContradictoryEvidence);
    }
    v.iter_mut().for_each(|x| *x /= z);
    Ok(v)
}

/// Unnormalized `P(query, evidence)` over the query's states.
pub(crate) fn unnormalized_marginal(net: &CausalNetwork, likelihoods: &[Option<Vec<f64>>], query: usize) -> Vec<f64> {
    // Variables that are neither ancestors of the query nor of any evidence are
    // barren and sum out to one.
    let mut relevant = BTreeSet::new();
    let mut stack: Vec<usize> = std::iter::once(query)
        .chain(
            likelihoods
                .iter()
                .enumerate()
                .filter_map(|(i, l)| l.as_ref().map(|_| i)),
        )
        .collect();
    while let Some(v) = stack.pop() {
        if relevant.insert(v) {
            stack.extend_from_slice(net.parents(v));
        }
    }

    let mut factors: Vec<Factor> = Vec::with_capacity(relevant.len() * 2);
    for &v in &relevant {
        factors.push(table_factor(net, v));
        if let Some(l) = &likelihoods[v] {
            factors.push(Factor::unary(v, l.clone()));
        }
    }

    let hidden: Vec<usize> = relevant.iter().copied().filter(|&v| v != query).collect();
    for v in min_fill_order(net, &factors, &hidden) {
        let (touching, rest): (Vec<Factor>, Vec<Factor>) = factors.into_iter().partition(|f| f.contains(v));
        factors = rest;
        if let Some(prod) = touching.into_iter().reduce(|a, b| a.product(&b)) {
            factors.push(prod.sum_out(v));
        }
    }

    let result = factors
        .into_iter()
        .reduce(|a, b| a.product(&b))
        .expect("query table is always present");
    debug_assert_eq!(result.vars, vec![query]);
    result.values
}

fn table_factor(net: &CausalNetwork, v: usize) -> Factor {
    let mut vars: Vec<usize> = net.parents(v).to_vec();
    vars.push(v);
    let cards = vars.iter().map(|&u| net.cardinality(u)).collect();
    Factor {
        vars,
        cards,
        values: net.table(v).to_vec(),
    }
}

/// Greedy min-fill elimination order over the interaction graph of `factors`,
/// restricted to `candidates`. Ties are broken by lexical variable id.
fn min_fill_order(net: &CausalNetwork, factors: &[Factor], candidates: &[usize]) -> Vec<usize> {
    let mut adj: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for f in factors {
        for &a in &f.vars {
            let entry = adj.entry(a).or_default();
            entry.extend(f.vars.iter().copied().filter(|&b| b != a));
        }
    }
    greedy_order(net, adj, candidates).0
}

fn greedy_order(
    net: &CausalNetwork,
    mut adj: BTreeMap<usize, BTreeSet<usize>>,
    candidates: &[usize],
) -> (Vec<usize>, usize) {
    let mut remaining: BTreeSet<usize> = candidates.iter().copied().collect();
    let mut order = Vec::with_capacity(remaining.len());
    let mut width = 0;
    while !remaining.is_empty() {
        let best = *remaining
            .iter()
            .min_by(|&&a, &&b| {
                fill_in(&adj, a)
                    .cmp(&fill_in(&adj, b))
                    .then_with(|| net.variable(a).id.cmp(&net.variable(b).id))
            })
            .unwrap();
        let neighbors: Vec<usize> = adj.get(&best).map(|s| s.iter().copied().collect()).unwrap_or_default();
        width = width.max(neighbors.len());
        for (i, &a) in neighbors.iter().enumerate() {
            for &b in &neighbors[i + 1..] {
                adj.entry(a).or_default().insert(b);
                adj.entry(b).or_default().insert(a);
            }
        }
        for n in &neighbors {
            if let Some(s) = adj.get_mut(n) {
                s.remove(&best);
            }
        }
        adj.remove(&best);
        remaining.remove(&best);
        order.push(best);
    }
    (order, width)
}

fn fill_in(adj: &BTreeMap<usize, BTreeSet<usize>>, v: usize) -> usize {
    let Some(nb) = adj.get(&v) else { return 0 };
    let nb: Vec<usize> = nb.iter().copied().collect();
    let mut missing = 0;
    for (i, a) in nb.iter().enumerate() {
        for b in &nb[i + 1..] {
            if !adj.get(a).is_some_and(|s| s.contains(b)) {
                missing += 1;
            }
        }
    }
    missing
}

/// Min-fill elimination order of the whole moralized network.
pub fn elimination_order(net: &CausalNetwork) -> Vec<usize> {
    let (order, _) = moral_order(net);
    order
}

/// Induced width of the min-fill order: the largest neighbor count of a
/// variable at the moment it is eliminated.
pub fn elimination_width(net: &CausalNetwork) -> usize {
    moral_order(net).1
}

fn moral_order(net: &CausalNetwork) -> (Vec<usize>, usize) {
    let factors: Vec<Factor> = (0..net.len()).map(|v| table_factor(net, v)).collect();
    let mut adj: BTreeMap<usize, BTreeSet<usize>> = (0..net.len()).map(|v| (v, BTreeSet::new())).collect();
    for f in &factors {
        for &a in &f.vars {
            adj.get_mut(&a)
                .unwrap()
                .extend(f.vars.iter().copied().filter(|&b| b != a));
        }
    }
    let all: Vec<usize> = (0..net.len()).collect();
    greedy_order(net, adj, &all)
}
