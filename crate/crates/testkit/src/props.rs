//! Property checks for risk, tail risk, pooling and conflict.
//!
//! Each property is a strategy plus a check, so the same case generator can be
//! driven by `proptest!` in unit-level suites and by an explicit `TestRunner`
//! with a fixed case count in the acceptance run.

use epidss_core::bayes::Variable;
use epidss_core::consensus::{conflict, pool, ExpertPosterior, PoolMethod, WeightSource};
use epidss_core::risk::{risk_score, tail_risk, CostModel};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

/// A probability vector of length `len`; entries may be exactly zero.
pub fn distribution(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 6 => 0.001f64..1.0], len).prop_map(|mut v| {
        if v.iter().all(|&x| x == 0.0) {
            v[0] = 1.0;
        }
        let z: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= z);
        v
    })
}

fn variable(k: usize) -> Variable {
    Variable::new("X", (0..k).map(|i| format!("s{i}")))
}

fn cost_model(costs: &[f64]) -> CostModel {
    CostModel::new("X", costs.iter().enumerate().map(|(i, &c)| (format!("s{i}"), c)))
}

fn risk_of(costs: &[f64], posterior: &[f64]) -> f64 {
    risk_score(&cost_model(costs), &variable(costs.len()), posterior)
        .expect("valid risk inputs")
        .risk
}

#[derive(Debug, Clone)]
pub struct RiskCase {
    pub posterior: Vec<f64>,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

pub fn risk_case() -> impl Strategy<Value = RiskCase> {
    (2usize..7).prop_flat_map(|k| {
        (
            distribution(k),
            prop::collection::vec(0.0f64..1e4, k),
            prop::collection::vec(0.0f64..1e4, k),
            0.0f64..10.0,
            0.0f64..10.0,
        )
            .prop_map(|(posterior, c1, c2, a, b)| RiskCase {
                posterior,
                c1,
                c2,
                a,
                b,
            })
    })
}

/// risk(a C1 + b C2) = a risk(C1) + b risk(C2).
pub fn risk_linearity(case: &RiskCase) -> Result<(), TestCaseError> {
    let combined: Vec<f64> = case
        .c1
        .iter()
        .zip(&case.c2)
        .map(|(x, y)| case.a * x + case.b * y)
        .collect();
    let lhs = risk_of(&combined, &case.posterior);
    let rhs = case.a * risk_of(&case.c1, &case.posterior) + case.b * risk_of(&case.c2, &case.posterior);
    prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
    let scaled = risk_score(
        &cost_model(&case.c1).scaled(case.a),
        &variable(case.c1.len()),
        &case.posterior,
    )
    .unwrap()
    .risk;
    let expect = case.a * risk_of(&case.c1, &case.posterior);
    prop_assert!((scaled - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
    Ok(())
}

/// Raising any cost never lowers the risk or its tail.
pub fn risk_monotonicity(case: &RiskCase) -> Result<(), TestCaseError> {
    let raised: Vec<f64> = case.c1.iter().zip(&case.c2).map(|(x, d)| x + d).collect();
    let var = variable(case.c1.len());
    let base = risk_score(&cost_model(&case.c1), &var, &case.posterior).unwrap();
    let up = risk_score(&cost_model(&raised), &var, &case.posterior).unwrap();
    prop_assert!(up.risk >= base.risk - 1e-9 * (1.0 + base.risk.abs()));
    prop_assert!(up.tail_risk >= base.tail_risk - 1e-9 * (1.0 + base.tail_risk.abs()));
    Ok(())
}

pub fn tail_case() -> impl Strategy<Value = (Vec<f64>, f64)> {
    (prop::collection::vec(-1e3f64..1e3, 1..200), 0.5f64..0.999)
}

/// Expected shortfall at q >= 0.5 is never below the sample mean.
pub fn tail_at_least_mean((samples, q): &(Vec<f64>, f64)) -> Result<(), TestCaseError> {
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let tail = tail_risk(samples, *q).unwrap();
    prop_assert!(tail.value >= mean - 1e-9, "tail {} < mean {mean}", tail.value);
    prop_assert!(tail.value >= tail.quantile - 1e-9);
    Ok(())
}

fn experts(posteriors: Vec<Vec<f64>>, weights: Vec<f64>) -> Vec<ExpertPosterior> {
    posteriors
        .into_iter()
        .zip(weights)
        .enumerate()
        .map(|(i, (p, w))| ExpertPosterior::new(format!("e{i}"), p, WeightSource::Explicit(w)))
        .collect()
}

#[derive(Debug, Clone)]
pub struct PanelCase {
    pub posteriors: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// A permutation of the panel.
    pub order: Vec<usize>,
    pub scale: f64,
}

pub fn panel_case() -> impl Strategy<Value = PanelCase> {
    (2usize..6, 1usize..7).prop_flat_map(|(k, m)| {
        (
            prop::collection::vec(distribution(k), m),
            prop::collection::vec(0.01f64..10.0, m),
            Just((0..m).collect::<Vec<_>>()).prop_shuffle(),
            prop_oneof![1e-3f64..1.0, 1.0f64..1e3],
            any::<bool>(),
        )
            .prop_map(|(mut posteriors, weights, order, scale, unanimous)| {
                if unanimous {
                    let first = posteriors[0].clone();
                    posteriors.iter_mut().for_each(|p| *p = first.clone());
                }
                PanelCase {
                    posteriors,
                    weights,
                    order,
                    scale,
                }
            })
    })
}

/// A unanimous panel pools to exactly the shared posterior.
pub fn pool_unanimity(case: &PanelCase) -> Result<(), TestCaseError> {
    let shared = case.posteriors[0].clone();
    let panel = experts(vec![shared.clone(); case.weights.len()], case.weights.clone());
    prop_assert_eq!(pool(&panel, PoolMethod::Linear).unwrap(), shared);
    Ok(())
}

pub fn pool_permutation_invariance(case: &PanelCase) -> Result<(), TestCaseError> {
    let panel = experts(case.posteriors.clone(), case.weights.clone());
    let shuffled: Vec<ExpertPosterior> = case.order.iter().map(|&i| panel[i].clone()).collect();
    let a = pool(&panel, PoolMethod::Linear).unwrap();
    let b = pool(&shuffled, PoolMethod::Linear).unwrap();
    for (x, y) in a.iter().zip(&b) {
        prop_assert!((x - y).abs() <= 1e-12, "{a:?} vs {b:?}");
    }
    Ok(())
}

pub fn pool_weight_scale_invariance(case: &PanelCase) -> Result<(), TestCaseError> {
    let panel = experts(case.posteriors.clone(), case.weights.clone());
    let scaled = experts(
        case.posteriors.clone(),
        case.weights.iter().map(|w| w * case.scale).collect(),
    );
    let a = pool(&panel, PoolMethod::Linear).unwrap();
    let b = pool(&scaled, PoolMethod::Linear).unwrap();
    for (x, y) in a.iter().zip(&b) {
        prop_assert!((x - y).abs() <= 1e-12, "{a:?} vs {b:?}");
    }
    Ok(())
}

/// Conflict is zero exactly when every expert reports the same posterior.
pub fn conflict_zero_iff_identical(case: &PanelCase) -> Result<(), TestCaseError> {
    if case.posteriors.len() < 2 {
        return Ok(());
    }
    let panel = experts(case.posteriors.clone(), case.weights.clone());
    let c = conflict(&panel).unwrap();
    let identical = case.posteriors.iter().all(|p| *p == case.posteriors[0]);
    prop_assert_eq!(c == 0.0, identical, "conflict {}", c);
    prop_assert!((0.0..=1.0).contains(&c));
    Ok(())
}
