//! Reference implementations used only by tests.
//!
//! Nothing here shares code paths with the engines under test: the oracle
//! works from the string-keyed interchange document and enumerates the full
//! joint distribution.

pub mod oracle;
pub mod props;

use epidss_core::bayes::{CausalNetwork, Evidence};
use rand::Rng;

/// Draws `count` (evidence, query) pairs over `net`: up to three hard
/// observations, sometimes a soft one, and a query that is never hard-observed.
pub fn random_queries<R: Rng>(net: &CausalNetwork, rng: &mut R, count: usize) -> Vec<(Evidence, String)> {
    let n = net.len();
    (0..count)
        .map(|_| {
            let query = rng.gen_range(0..n);
            let mut ev = Evidence::new();
            for _ in 0..rng.gen_range(0..=3usize.min(n - 1)) {
                let v = rng.gen_range(0..n);
                if v == query {
                    continue;
                }
                let var = net.variable(v);
                let s = rng.gen_range(0..var.cardinality());
                ev.hard.insert(var.id.clone(), var.states[s].clone());
            }
            if rng.gen_bool(0.5) {
                let v = rng.gen_range(0..n);
                let var = net.variable(v);
                if !ev.hard.contains_key(&var.id) {
                    let lik = (0..var.cardinality()).map(|_| rng.gen_range(0.05..1.0)).collect();
                    ev.soft.insert(var.id.clone(), lik);
                }
            }
            (ev, net.variable(query).id.clone())
        })
        .collect()
}

/// Half the L1 distance.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Histogram of `values` over bins (-inf, t1), [t1, t2), .., [tk, inf), by linear scan.
pub fn histogram(values: &[f64], thresholds: &[f64]) -> Vec<f64> {
    let mut counts = vec![0u64; thresholds.len() + 1];
    for &x in values {
        let mut bin = 0;
        for (j, &t) in thresholds.iter().enumerate() {
            if x >= t {
                bin = j + 1;
            }
        }
        counts[bin] += 1;
    }
    counts.iter().map(|&c| c as f64 / values.len() as f64).collect()
}
