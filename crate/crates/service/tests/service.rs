use std::collections::BTreeMap;
use std::sync::Arc;
use std::thread;

use epidss_core::admiralty::GradedEvidence;
use epidss_core::bayes::{posterior_exact, Evidence, NetworkBuilder, NetworkDocument};
use epidss_core::preparedness::{template_document, COMMUNITY_TRANSMISSION, OUTBREAK_RISK};
use epidss_core::risk::CostModel;
use epidss_service::{
    consensus, ConsensusRequest, CreateScenario, EngineKind, PosteriorQuery, Service, ServiceError, WhatIfRequest,
};
use tempfile::TempDir;

fn disease() -> NetworkDocument {
    NetworkBuilder::new()
        .variable("Disease", ["yes", "no"])
        .variable("Test", ["positive", "negative"])
        .edge("Disease", "Test")
        .table("Disease", vec![vec![0.01, 0.99]])
        .table("Test", vec![vec![0.95, 0.05], vec![0.02, 0.98]])
        .document()
}

fn setup(doc: NetworkDocument) -> (TempDir, Service, String) {
    let dir = TempDir::new().unwrap();
    let svc = Service::open(dir.path()).unwrap();
    let id = svc
        .create_scenario(CreateScenario {
            name: "t".into(),
            network: doc,
            seed: Some(1),
        })
        .unwrap()
        .id;
    (dir, svc, id)
}

fn graded(var: &str, state: &str, grade: &str) -> GradedEvidence {
    GradedEvidence::new(Evidence::hard(var, state), grade.parse().unwrap(), "lab")
}

fn query(svc: &Service, id: &str, var: &str) -> Vec<f64> {
    svc.posterior(
        id,
        &PosteriorQuery {
            variable: var.into(),
            ..Default::default()
        },
    )
    .unwrap()
    .posterior
}

#[test]
fn template_scenario_starts_at_revision_one() {
    let (_dir, svc, id) = setup(template_document());
    let s = svc.scenario(&id).unwrap();
    assert_eq!(s.revision, 1);
    assert_eq!(s.summary.engine.kind, EngineKind::Exact);
    assert_eq!(s.summary.engine.seed, 1);
    assert_eq!(s.network.to_json(), template_document().to_json());
}

#[test]
fn cyclic_network_rejected_with_report() {
    let dir = TempDir::new().unwrap();
    let svc = Service::open(dir.path()).unwrap();
    let mut doc = disease();
    doc.edges.push(("Test".into(), "Disease".into()));
    match svc.create_scenario(CreateScenario {
        name: "bad".into(),
        network: doc,
        seed: None,
    }) {
        Err(ServiceError::InvalidNetwork(report)) => assert!(report.mentions("cycle detected"), "{report}"),
        other => panic!("{other:?}"),
    }
    assert!(svc.list().unwrap().is_empty());
}

#[test]
fn graded_positive_test() {
    let (_dir, svc, id) = setup(disease());
    let prior = query(&svc, &id, "Disease")[0];
    let full = svc.submit_evidence(&id, graded("Test", "positive", "A1")).unwrap();
    assert_eq!(full.revision, 2);
    let p = full.summary.marginals["Disease"][0];
    assert!((p - 0.01 * 0.95 / (0.01 * 0.95 + 0.99 * 0.02)).abs() < 1e-12, "{p}");

    let (_dir2, svc2, id2) = setup(disease());
    let weak = svc2.submit_evidence(&id2, graded("Test", "positive", "C1")).unwrap();
    let q = weak.summary.marginals["Disease"][0];
    assert!(prior < q && q < p, "{prior} < {q} < {p}");
}

#[test]
fn conflicting_hard_evidence_rejected_and_log_unchanged() {
    let (_dir, svc, id) = setup(disease());
    svc.submit_evidence(&id, graded("Test", "positive", "A1")).unwrap();
    let before = svc.scenario(&id).unwrap();
    let err = svc.submit_evidence(&id, graded("Test", "negative", "A1")).unwrap_err();
    assert!(matches!(err, ServiceError::Contradictory(_)), "{err}");
    assert_eq!(svc.scenario(&id).unwrap(), before);
}

#[test]
fn previous_revisions_stay_queryable() {
    let (_dir, svc, id) = setup(disease());
    let r1 = query(&svc, &id, "Disease");
    svc.submit_evidence(&id, graded("Test", "positive", "B2")).unwrap();
    let at = |revision| {
        svc.posterior(
            &id,
            &PosteriorQuery {
                variable: "Disease".into(),
                revision: Some(revision),
                cost_model: None,
            },
        )
    };
    assert_eq!(at(1).unwrap().posterior, r1);
    assert_ne!(at(2).unwrap().posterior, r1);
    assert!(matches!(at(3), Err(ServiceError::UnknownRevision { .. })));
}

#[test]
fn what_if_branches() {
    let (_dir, svc, id) = setup(template_document());
    svc.set_cost_model(
        &id,
        "loss",
        CostModel::new(OUTBREAK_RISK, [("low", 0.0), ("med", 5.0), ("high", 50.0)]),
    )
    .unwrap();
    let revision = svc.scenario(&id).unwrap().revision;

    let empty = svc
        .what_if(
            &id,
            &WhatIfRequest {
                query: OUTBREAK_RISK.into(),
                ..Default::default()
            },
        )
        .unwrap();
    assert_eq!(empty.baseline, empty.hypothetical);

    let req = WhatIfRequest {
        delta: Evidence::hard(COMMUNITY_TRANSMISSION, "yes"),
        query: OUTBREAK_RISK.into(),
        cost_model: Some("loss".into()),
    };
    let r = svc.what_if(&id, &req).unwrap();
    let base = r.baseline.posterior.as_ref().unwrap();
    let hyp = r.hypothetical.posterior.as_ref().unwrap();
    assert!(hyp[2] >= base[2]);
    assert!(r.hypothetical.risk.as_ref().unwrap().risk >= r.baseline.risk.as_ref().unwrap().risk);
    assert_eq!(svc.scenario(&id).unwrap().revision, revision);

    let contradictory = WhatIfRequest {
        delta: Evidence::hard(COMMUNITY_TRANSMISSION, "yes").with_hard("LocalTransmission", "no"),
        query: OUTBREAK_RISK.into(),
        cost_model: None,
    };
    let r = svc.what_if(&id, &contradictory).unwrap();
    assert!(r.baseline.posterior.is_some());
    assert!(r.hypothetical.error.as_deref().unwrap().contains("contradictory"));
    assert_eq!(svc.scenario(&id).unwrap().revision, revision);
}

#[test]
fn cost_models_validated_against_network() {
    let (_dir, svc, id) = setup(disease());
    let bad = CostModel::new("Disease", [("yes", 1.0)]);
    assert!(svc.set_cost_model(&id, "x", bad).is_err());
    let bad_var = CostModel::new("Nope", [("yes", 1.0)]);
    assert!(svc.set_cost_model(&id, "x", bad_var).is_err());
    assert_eq!(svc.scenario(&id).unwrap().revision, 1);
    let ok = svc
        .set_cost_model(&id, "x", CostModel::new("Disease", [("yes", 100.0), ("no", 0.0)]))
        .unwrap();
    assert_eq!(ok.revision, 2);
    let r = svc
        .posterior(
            &id,
            &PosteriorQuery {
                variable: "Disease".into(),
                revision: None,
                cost_model: Some("x".into()),
            },
        )
        .unwrap();
    assert!((r.risk.unwrap().risk - 1.0).abs() < 1e-12);
}

#[test]
fn replay_matches_stored_summary() {
    let (_dir, svc, id) = setup(template_document());
    for (v, s, g) in [
        ("ImportedCases", "few", "B3"),
        ("TestingCapacity", "low", "D2"),
        ("Severity", "6", "A4"),
    ] {
        svc.submit_evidence(&id, graded(v, s, g)).unwrap();
    }
    assert_eq!(svc.replay(&id).unwrap(), svc.scenario(&id).unwrap().summary);
}

#[test]
fn observed_query_is_one_hot() {
    let (_dir, svc, id) = setup(disease());
    let r = svc
        .what_if(
            &id,
            &WhatIfRequest {
                delta: Evidence::hard("Disease", "no"),
                query: "Disease".into(),
                cost_model: None,
            },
        )
        .unwrap();
    assert_eq!(r.hypothetical.posterior.unwrap(), vec![0.0, 1.0]);
}

/// Square lattice of binary nodes, each caused by its upper and left neighbours.
fn lattice(side: usize) -> NetworkDocument {
    let name = |r: usize, c: usize| format!("g{r:02}_{c:02}");
    let mut b = NetworkBuilder::new();
    for r in 0..side {
        for c in 0..side {
            b = b.variable(&name(r, c), ["0", "1"]);
        }
    }
    for r in 0..side {
        for c in 0..side {
            let mut parents = 0;
            if r > 0 {
                b = b.edge(&name(r - 1, c), &name(r, c));
                parents += 1;
            }
            if c > 0 {
                b = b.edge(&name(r, c - 1), &name(r, c));
                parents += 1;
            }
            let rows = (0..1usize << parents)
                .map(|k| {
                    let p = 0.2 + 0.6 * k as f64 / (1usize << parents) as f64;
                    vec![p, 1.0 - p]
                })
                .collect();
            b = b.table(&name(r, c), rows);
        }
    }
    b.document()
}

#[test]
fn wide_networks_use_the_seeded_sampler() {
    let (_dir, svc, id) = setup(lattice(22));
    let s = svc.scenario(&id).unwrap();
    assert!(s.summary.engine.elimination_width > 20);
    assert_eq!(s.summary.engine.kind, EngineKind::Sampled);
    assert_eq!(s.summary.engine.n_samples, Some(100_000));
    assert_eq!(s.summary.engine.seed, 1);
    // root marginal equals its prior up to sampling noise
    assert!((s.summary.marginals["g00_00"][0] - 0.2).abs() < 0.01);

    let r = svc.submit_evidence(&id, graded("g05_05", "1", "A1")).unwrap();
    assert_eq!(r.summary.marginals["g05_05"], vec![0.0, 1.0]);
    assert_eq!(svc.replay(&id).unwrap(), svc.scenario(&id).unwrap().summary);
}

#[test]
fn writers_to_one_scenario_are_serialized() {
    let (_dir, svc, id) = setup(template_document());
    let svc = Arc::new(svc);
    let handles: Vec<_> = (0..8)
        .map(|i| {
            let svc = Arc::clone(&svc);
            let id = id.clone();
            thread::spawn(move || {
                let state = ["1", "2", "3", "4", "5"][i % 5];
                svc.submit_evidence(&id, graded("Transmissibility", state, "E5"))
                    .unwrap();
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    let s = svc.scenario(&id).unwrap();
    assert_eq!(s.revision, 9);
    let revisions: Vec<u64> = s.evidence.iter().map(|r| r.revision).collect();
    assert_eq!(revisions, (2..=9).collect::<Vec<_>>());
}

#[test]
fn consensus_pools_and_reports_conflict() {
    let req: ConsensusRequest = serde_json::from_str(
        r#"{"experts": [
            {"expert": "a", "posterior": [1.0, 0.0], "weight": {"explicit": 3.0}},
            {"expert": "b", "posterior": [0.0, 1.0], "weight": {"explicit": 1.0}}
        ]}"#,
    )
    .unwrap();
    let r = consensus(&req).unwrap();
    assert_eq!(r.pooled, vec![0.75, 0.25]);
    assert_eq!(r.conflict, Some(1.0));
}

#[test]
fn exact_engine_matches_core_inference() {
    let (_dir, svc, id) = setup(template_document());
    svc.submit_evidence(&id, graded(COMMUNITY_TRANSMISSION, "yes", "A1"))
        .unwrap();
    let net = svc.scenario(&id).unwrap().causal_network().unwrap();
    let soft = Evidence::soft(COMMUNITY_TRANSMISSION, vec![1.0, 0.0]);
    let expected = posterior_exact(&net, &soft, OUTBREAK_RISK).unwrap();
    assert_eq!(query(&svc, &id, OUTBREAK_RISK), expected);
    let _: BTreeMap<String, Vec<f64>> = svc.scenario(&id).unwrap().summary.marginals;
}
