//! Likelihood-weighted forward sampling.
//!
//! Samples are drawn in a fixed number of chunks, each from its own ChaCha
//! stream derived from the seed. Chunks run in parallel and their tallies
//! merge in chunk order, so the result depends only on `(seed, n_samples)`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BayesError, CausalNetwork, Evidence};

/// Number of independent sampling streams per call.
pub const SAMPLING_STREAMS: u64 = 16;

/// Result of a sampled posterior query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPosterior {
    pub probabilities: Vec<f64>,
    /// Delta-method standard error of each ratio estimate.
    pub standard_errors: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
    pub effective_sample_size: f64,
}

/// Mergeable sufficient statistics of a weighted sample.
#[derive(Debug, Clone)]
struct Tally {
    weight: f64,
    weight_sq: f64,
    by_state: Vec<f64>,
    by_state_sq: Vec<f64>,
}

impl Tally {
    fn new(card: usize) -> Self {
        Self {
            weight: 0.0,
            weight_sq: 0.0,
            by_state: vec![0.0; card],
            by_state_sq: vec![0.0; card],
        }
    }

    fn add(&mut self, state: usize, w: f64) {
        self.weight += w;
        self.weight_sq += w * w;
        self.by_state[state] += w;
        self.by_state_sq[state] += w * w;
    }

    fn merge(mut self, other: &Tally) -> Self {
        self.weight += other.weight;
        self.weight_sq += other.weight_sq;
        for (a, b) in self.by_state.iter_mut().zip(&other.by_state) {
            *a += b;
        }
        for (a, b) in self.by_state_sq.iter_mut().zip(&other.by_state_sq) {
            *a += b;
        }
        self
    }
}

/// Estimates the belief of `query` by likelihood weighting.
pub fn posterior_sampled(
    net: &CausalNetwork,
    evidence: &Evidence,
    query: &str,
    n_samples: usize,
    seed: u64,
) -> Result<SampledPosterior, BayesError> {
    let q = net.index_of(query)?;
    if evidence.hard.contains_key(query) {
        return Err(BayesError::QueryObserved(query.to_owned()));
    }
    let mut tallies = sample(net, evidence, &[q], n_samples, seed)?;
    finish(tallies.remove(0), n_samples, seed)
}

/// Sampled beliefs of every variable without hard evidence, from one shared
/// set of draws. Each entry equals the corresponding [`posterior_sampled`] call.
pub fn marginals_sampled(
    net: &CausalNetwork,
    evidence: &Evidence,
    n_samples: usize,
    seed: u64,
) -> Result<BTreeMap<String, SampledPosterior>, BayesError> {
    let queries: Vec<usize> = (0..net.len())
        .filter(|&v| !evidence.hard.contains_key(&net.variable(v).id))
        .collect();
    let tallies = sample(net, evidence, &queries, n_samples, seed)?;
    queries
        .iter()
        .zip(tallies)
        .map(|(&v, t)| Ok((net.variable(v).id.clone(), finish(t, n_samples, seed)?)))
        .collect()
}

fn sample(
    net: &CausalNetwork,
    evidence: &Evidence,
    queries: &[usize],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<Tally>, BayesError> {
    if n_samples == 0 {
        return Err(BayesError::NoSamples);
    }
    let lik = evidence.likelihoods(net)?;
    let hard: Vec<Option<usize>> = (0..net.len())
        .map(|v| {
            evidence
                .hard
                .get(&net.variable(v).id)
                .map(|s| net.state_index(v, s).expect("checked by likelihoods"))
        })
        .collect();

    let fresh = || {
        queries
            .iter()
            .map(|&q| Tally::new(net.cardinality(q)))
            .collect::<Vec<_>>()
    };
    let base = n_samples as u64 / SAMPLING_STREAMS;
    let extra = n_samples as u64 % SAMPLING_STREAMS;
    let per_stream: Vec<Vec<Tally>> = (0..SAMPLING_STREAMS)
        .into_par_iter()
        .map(|stream| {
            let count = base + u64::from(stream < extra);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            let mut tallies = fresh();
            let mut assignment = vec![0usize; net.len()];
            for _ in 0..count {
                let w = draw(net, &hard, &lik, &mut assignment, &mut rng);
                for (t, &q) in tallies.iter_mut().zip(queries) {
                    t.add(assignment[q], w);
                }
            }
            tallies
        })
        .collect();
    Ok(per_stream.iter().fold(fresh(), |acc, stream| {
        acc.into_iter().zip(stream).map(|(a, b)| a.merge(b)).collect()
    }))
}

fn finish(total: Tally, n_samples: usize, seed: u64) -> Result<SampledPosterior, BayesError> {
    if total.weight.is_nan() || total.weight <= 0.0 {
        return Err(BayesError::ZeroWeights(n_samples));
    }
    let probabilities: Vec<f64> = total.by_state.iter().map(|w| w / total.weight).collect();
    // Var(p_s) ~ sum w_i^2 (1[x_i = s] - p_s)^2 / (sum w_i)^2, expanded so it merges.
    let standard_errors = probabilities
        .iter()
        .zip(&total.by_state_sq)
        .map(|(&p, &wsq_s)| {
            let num = (1.0 - 2.0 * p) * wsq_s + p * p * total.weight_sq;
            num.max(0.0).sqrt() / total.weight
        })
        .collect();
    Ok(SampledPosterior {
        probabilities,
        standard_errors,
        n_samples,
        seed,
        effective_sample_size: total.weight * total.weight / total.weight_sq,
    })
}

fn draw(
    net: &CausalNetwork,
    hard: &[Option<usize>],
    lik: &[Option<Vec<f64>>],
    assignment: &mut [usize],
    rng: &mut ChaCha8Rng,
) -> f64 {
    let mut weight = 1.0;
    for &v in net.topological_order() {
        let row = net.row(v, net.row_index(v, assignment));
        if let Some(k) = hard[v] {
            assignment[v] = k;
            weight *= row[k];
            continue;
        }
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut state = row.len() - 1;
        for (k, p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                state = k;
                break;
            }
        }
        assignment[v] = state;
        if let Some(l) = &lik[v] {
            weight *= l[state];
        }
    }
    weight
}
