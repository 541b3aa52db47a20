//! Seeded random networks for testing and benchmarking inference engines.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CausalNetwork, NetworkBuilder};

#[derive(Debug, Clone, Copy)]
pub struct RandomNetworkSpec {
    pub nodes: usize,
    pub max_parents: usize,
    pub max_states: usize,
    /// Table entries are drawn so that no probability falls below this floor
    /// (before renormalization).
    pub min_probability: f64,
}

impl RandomNetworkSpec {
    pub fn binary(nodes: usize, max_parents: usize) -> Self {
        Self {
            nodes,
            max_parents,
            max_states: 2,
            min_probability: 0.05,
        }
    }
}

/// Generates a random DAG. Declaration order is a random permutation of the
/// causal order, so parents are not always declared before children.
pub fn random_network(spec: RandomNetworkSpec, seed: u64) -> CausalNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.nodes;
    let cards: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=spec.max_states.max(2))).collect();

    // parents[i] are causal-order indices < i
    let parents: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let k = rng.gen_range(0..=spec.max_parents.min(i));
            let mut pool: Vec<usize> = (0..i).collect();
            pool.shuffle(&mut rng);
            pool.truncate(k);
            pool
        })
        .collect();

    let mut declared: Vec<usize> = (0..n).collect();
    declared.shuffle(&mut rng);
    let name = |i: usize| format!("x{i:02}");

    let mut builder = NetworkBuilder::new();
    for &i in &declared {
        builder = builder.variable(&name(i), (0..cards[i]).map(|s| format!("s{s}")));
    }
    for (i, ps) in parents.iter().enumerate() {
        for &p in ps {
            builder = builder.edge(&name(p), &name(i));
        }
    }
    // Rows are i.i.d., so their canonical order does not matter here.
    for (i, ps) in parents.iter().enumerate() {
        let rows: usize = ps.iter().map(|&p| cards[p]).product();
        let table = (0..rows)
            .map(|_| {
                let raw: Vec<f64> = (0..cards[i]).map(|_| spec.min_probability + rng.gen::<f64>()).collect();
                let z: f64 = raw.iter().sum();
                let mut row: Vec<f64> = raw.iter().map(|x| x / z).collect();
                // push rounding drift into the last entry
                let head: f64 = row[..row.len() - 1].iter().sum();
                *row.last_mut().unwrap() = 1.0 - head;
                row
            })
            .collect();
        builder = builder.table(&name(i), table);
    }
    builder.build().expect("generated network is valid")
}
