//! Outbreak-risk template network, WHO preparedness levels, severity staging
//! and the Epidemic Preparedness Index.
//!
//! The template's tables are shipped defaults built to be monotone (more
//! transmission, higher transmissibility or severity never lowers the chance of
//! a high outbreak risk). They are not calibrated to data; edit
//! `assets/outbreak_network.json` or replace rows with [`install_sir_row`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bayes::{
    evidence_probability, BayesError, CausalNetwork, Evidence, NetworkBuilder, NetworkDocument, KEY_SEPARATOR,
};

pub const IMPORTED_CASES: &str = "ImportedCases";
pub const TESTING_CAPACITY: &str = "TestingCapacity";
pub const LOCAL_TRANSMISSION: &str = "LocalTransmission";
pub const COMMUNITY_TRANSMISSION: &str = "CommunityTransmission";
pub const TRANSMISSIBILITY: &str = "Transmissibility";
pub const SEVERITY: &str = "Severity";
pub const OUTBREAK_RISK: &str = "OutbreakRisk";

pub const TEMPLATE_NODES: [&str; 7] = [
    IMPORTED_CASES,
    TESTING_CAPACITY,
    LOCAL_TRANSMISSION,
    COMMUNITY_TRANSMISSION,
    TRANSMISSIBILITY,
    SEVERITY,
    OUTBREAK_RISK,
];

/// Bundled template document.
pub const OUTBREAK_NETWORK_JSON: &str = include_str!("../assets/outbreak_network.json");

pub const EPI_WEIGHT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum PreparednessError {
    #[error("`{0}` is not a node of the outbreak template")]
    NotTemplateNode(String),
    #[error("contradictory evidence")]
    Contradictory,
    #[error("transmissibility must be in 1..=5, got {0}")]
    TransmissibilityOutOfRange(u8),
    #[error("severity must be in 1..=7, got {0}")]
    SeverityOutOfRange(u8),
    #[error("sub-index `{0}` must lie in [0, 1]")]
    SubIndexOutOfRange(&'static str),
    #[error("weights must be non-negative and sum to 1, got sum {0}")]
    InvalidWeights(f64),
    #[error("no table row of `{variable}` matches {binding}")]
    NoMatchingRow { variable: String, binding: String },
    #[error(transparent)]
    Bayes(#[from] BayesError),
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

/// Builds the template document from its defining rules. The bundled JSON is
/// this document serialized.
pub fn template_document() -> NetworkDocument {
    let levels = |n: u8| (1..=n).map(|i| i.to_string()).collect::<Vec<_>>();

    // LocalTransmission | ImportedCases, TestingCapacity (low, high)
    let p_local = [[0.08, 0.04], [0.45, 0.30], [0.80, 0.60]];
    let local_rows = p_local
        .iter()
        .flat_map(|by_testing| by_testing.iter().map(|&p| vec![p, round4(1.0 - p)]))
        .collect();

    // OutbreakRisk | CommunityTransmission (yes, no), Transmissibility, Severity
    let mut risk_rows = Vec::new();
    for ct in [1.0, 0.0] {
        for t in 1..=5 {
            for s in 1..=7 {
                let score = 0.4 * ct + 0.3 * f64::from(t - 1) / 4.0 + 0.3 * f64::from(s - 1) / 6.0;
                let low = round4(0.05 + 0.85 * (1.0 - score).powi(2));
                let high = round4(0.05 + 0.85 * score.powi(2));
                risk_rows.push(vec![low, round4(1.0 - low - high), high]);
            }
        }
    }

    NetworkBuilder::new()
        .variable(IMPORTED_CASES, ["none", "few", "many"])
        .variable(TESTING_CAPACITY, ["low", "high"])
        .variable(LOCAL_TRANSMISSION, ["yes", "no"])
        .variable(COMMUNITY_TRANSMISSION, ["yes", "no"])
        .variable(TRANSMISSIBILITY, levels(5))
        .variable(SEVERITY, levels(7))
        .variable(OUTBREAK_RISK, ["low", "med", "high"])
        .edge(IMPORTED_CASES, LOCAL_TRANSMISSION)
        .edge(TESTING_CAPACITY, LOCAL_TRANSMISSION)
        .edge(LOCAL_TRANSMISSION, COMMUNITY_TRANSMISSION)
        .edge(COMMUNITY_TRANSMISSION, OUTBREAK_RISK)
        .edge(TRANSMISSIBILITY, OUTBREAK_RISK)
        .edge(SEVERITY, OUTBREAK_RISK)
        .table(IMPORTED_CASES, vec![vec![0.6, 0.3, 0.1]])
        .table(TESTING_CAPACITY, vec![vec![0.4, 0.6]])
        .table(LOCAL_TRANSMISSION, local_rows)
        // community transmission cannot exist without local transmission
        .table(COMMUNITY_TRANSMISSION, vec![vec![0.6, 0.4], vec![0.0, 1.0]])
        .table(TRANSMISSIBILITY, vec![vec![0.3, 0.3, 0.2, 0.15, 0.05]])
        .table(SEVERITY, vec![vec![0.3, 0.25, 0.2, 0.1, 0.08, 0.05, 0.02]])
        .table(OUTBREAK_RISK, risk_rows)
        .document()
}

/// The shipped outbreak-risk network, parsed from the bundled document.
pub fn default_outbreak_network() -> CausalNetwork {
    CausalNetwork::from_json(OUTBREAK_NETWORK_JSON).expect("bundled template is valid")
}

/// Which table rows an ensemble-derived distribution replaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SirBinding {
    pub variable: String,
    /// Partial parent assignment; every row consistent with it is replaced.
    /// Empty means all rows.
    #[serde(default)]
    pub parents: BTreeMap<String, String>,
}

impl Default for SirBinding {
    fn default() -> Self {
        Self {
            variable: OUTBREAK_RISK.to_owned(),
            parents: BTreeMap::new(),
        }
    }
}

/// Installs `row` (e.g. from `epi::discretize_to_cpt`) into every row of the
/// bound variable's table that matches the binding.
pub fn install_sir_row(
    net: &CausalNetwork,
    row: &[f64],
    binding: &SirBinding,
) -> Result<CausalNetwork, PreparednessError> {
    let var = net.index_of(&binding.variable)?;
    let parent_ids: Vec<&str> = net.parents(var).iter().map(|&p| net.variable(p).id.as_str()).collect();
    for (k, v) in &binding.parents {
        let pos = parent_ids
            .iter()
            .position(|p| p == k)
            .ok_or_else(|| PreparednessError::NotTemplateNode(k.clone()))?;
        net.state_index(net.parents(var)[pos], v)?;
    }
    let mut doc = net.to_document();
    let cut = &mut doc.cuts[var];
    let mut replaced = 0;
    for (key, values) in cut.rows.iter_mut() {
        let labels: Vec<&str> = if key.is_empty() {
            Vec::new()
        } else {
            key.split(KEY_SEPARATOR).collect()
        };
        let matches = binding
            .parents
            .iter()
            .all(|(k, v)| parent_ids.iter().zip(&labels).any(|(p, l)| p == k && l == v));
        if matches {
            *values = row.to_vec();
            replaced += 1;
        }
    }
    if replaced == 0 {
        return Err(PreparednessError::NoMatchingRow {
            variable: binding.variable.clone(),
            binding: format!("{:?}", binding.parents),
        });
    }
    Ok(CausalNetwork::from_document(&doc)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WhoLevel {
    CommunityTransmission,
    LocalTransmission,
    ImportedCases,
    HighRiskImported,
    Preparedness,
}

impl WhoLevel {
    /// 1 (community transmission) .. 5 (preparedness).
    pub fn number(self) -> u8 {
        self as u8 + 1
    }
}

/// Evidence over template nodes plus the flag that a neighboring region is at risk.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WhoEvidence {
    #[serde(default)]
    pub evidence: Evidence,
    #[serde(default)]
    pub neighboring_region_risk: bool,
}

/// Maps observed template states onto the WHO preparedness ladder.
///
/// Only hard observations drive the ladder; the whole evidence set must still
/// have positive probability under `net`.
pub fn who_level(net: &CausalNetwork, ev: &WhoEvidence) -> Result<WhoLevel, PreparednessError> {
    if let Some(bad) = ev.evidence.variables().find(|v| !TEMPLATE_NODES.contains(v)) {
        return Err(PreparednessError::NotTemplateNode(bad.to_owned()));
    }
    match evidence_probability(net, &ev.evidence) {
        Ok(p) if p > 0.0 => {}
        Ok(_) | Err(BayesError::ContradictoryEvidence) => return Err(PreparednessError::Contradictory),
        Err(e) => return Err(e.into()),
    }
    let hard = |var: &str| ev.evidence.hard.get(var).map(String::as_str);
    let level = if hard(COMMUNITY_TRANSMISSION) == Some("yes") {
        WhoLevel::CommunityTransmission
    } else if hard(LOCAL_TRANSMISSION) == Some("yes") {
        WhoLevel::LocalTransmission
    } else if matches!(hard(IMPORTED_CASES), Some("few" | "many")) {
        WhoLevel::ImportedCases
    } else if ev.neighboring_region_risk
        && hard(TRANSMISSIBILITY)
            .and_then(|t| t.parse::<u8>().ok())
            .is_some_and(|t| t >= 4)
    {
        WhoLevel::HighRiskImported
    } else {
        WhoLevel::Preparedness
    };
    Ok(level)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoarseScore {
    LowModerate,
    ModerateHigh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum SeverityAssessment {
    /// Limited data: only coarse ratings are available.
    Early {
        transmissibility: CoarseScore,
        severity: CoarseScore,
    },
    /// Transmissibility on 1..=5, severity on 1..=7.
    DataRich { transmissibility: u8, severity: u8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImpactCategory {
    Low,
    Moderate,
    High,
    Extreme,
}

pub fn severity_stage(assessment: &SeverityAssessment) -> Result<ImpactCategory, PreparednessError> {
    match *assessment {
        SeverityAssessment::Early {
            transmissibility,
            severity,
        } => {
            let coarse = |c: CoarseScore| match c {
                CoarseScore::LowModerate => ImpactCategory::Moderate,
                CoarseScore::ModerateHigh => ImpactCategory::High,
            };
            Ok(coarse(transmissibility).max(coarse(severity)))
        }
        SeverityAssessment::DataRich {
            transmissibility: t,
            severity: s,
        } => {
            if !(1..=5).contains(&t) {
                return Err(PreparednessError::TransmissibilityOutOfRange(t));
            }
            if !(1..=7).contains(&s) {
                return Err(PreparednessError::SeverityOutOfRange(s));
            }
            Ok(if t <= 2 && s <= 2 {
                ImpactCategory::Low
            } else if t >= 4 && s >= 6 {
                ImpactCategory::Extreme
            } else if t >= 4 || s >= 5 {
                ImpactCategory::High
            } else {
                ImpactCategory::Moderate
            })
        }
    }
}

/// The five national-capacity sub-indexes, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpiSubIndexes {
    pub public_health_infrastructure: f64,
    pub physical_infrastructure: f64,
    pub institutional_capacity: f64,
    pub economic_resources: f64,
    pub public_health_communication: f64,
}

impl EpiSubIndexes {
    pub fn uniform(x: f64) -> Self {
        Self {
            public_health_infrastructure: x,
            physical_infrastructure: x,
            institutional_capacity: x,
            economic_resources: x,
            public_health_communication: x,
        }
    }

    pub fn named(&self) -> [(&'static str, f64); 5] {
        [
            ("public_health_infrastructure", self.public_health_infrastructure),
            ("physical_infrastructure", self.physical_infrastructure),
            ("institutional_capacity", self.institutional_capacity),
            ("economic_resources", self.economic_resources),
            ("public_health_communication", self.public_health_communication),
        ]
    }
}

pub const EQUAL_EPI_WEIGHTS: [f64; 5] = [0.2; 5];

/// Weighted mean of the sub-indexes.
pub fn epi_index(sub: &EpiSubIndexes, weights: &[f64; 5]) -> Result<f64, PreparednessError> {
    for (name, x) in sub.named() {
        if !(x.is_finite() && (0.0..=1.0).contains(&x)) {
            return Err(PreparednessError::SubIndexOutOfRange(name));
        }
    }
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || (total - 1.0).abs() > EPI_WEIGHT_TOLERANCE {
        return Err(PreparednessError::InvalidWeights(total));
    }
    let weighted: f64 = sub.named().iter().zip(weights).map(|((_, x), w)| w * x).sum();
    Ok((weighted / total).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::{posterior_exact, validate_network};

    #[test]
    fn bundled_document_matches_generator() {
        let generated = template_document();
        assert!(
            validate_network(&generated).is_valid(),
            "{}",
            validate_network(&generated)
        );
        assert_eq!(NetworkDocument::from_json(OUTBREAK_NETWORK_JSON).unwrap(), generated);
        assert_eq!(OUTBREAK_NETWORK_JSON.trim_end(), generated.to_json());
        assert_eq!(default_outbreak_network().len(), 7);
    }

    /// Rewrites the bundled asset after editing the generator:
    /// `cargo test -p epidss-core regenerate_template -- --ignored`
    #[test]
    #[ignore]
    fn regenerate_template() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/assets/outbreak_network.json");
        std::fs::write(path, template_document().to_json() + "\n").unwrap();
    }

    #[test]
    fn community_transmission_raises_outbreak_risk() {
        let net = default_outbreak_network();
        let yes = posterior_exact(&net, &Evidence::hard(COMMUNITY_TRANSMISSION, "yes"), OUTBREAK_RISK).unwrap();
        let no = posterior_exact(&net, &Evidence::hard(COMMUNITY_TRANSMISSION, "no"), OUTBREAK_RISK).unwrap();
        assert!(yes[2] >= no[2]);
    }

    #[test]
    fn outbreak_table_is_monotone_in_each_parent() {
        let net = default_outbreak_network();
        let risk = net.index_of(OUTBREAK_RISK).unwrap();
        let idx = |ct: usize, t: usize, s: usize| (ct * 5 + t) * 7 + s;
        for ct in 0..2 {
            for t in 0..5 {
                for s in 0..7 {
                    let here = net.row(risk, idx(ct, t, s))[2];
                    if t + 1 < 5 {
                        assert!(net.row(risk, idx(ct, t + 1, s))[2] >= here);
                    }
                    if s + 1 < 7 {
                        assert!(net.row(risk, idx(ct, t, s + 1))[2] >= here);
                    }
                    if ct == 0 {
                        assert!(net.row(risk, idx(1, t, s))[2] <= here);
                    }
                }
            }
        }
    }

    fn who(ev: Evidence, neighbor: bool) -> Result<WhoLevel, PreparednessError> {
        who_level(
            &default_outbreak_network(),
            &WhoEvidence {
                evidence: ev,
                neighboring_region_risk: neighbor,
            },
        )
    }

    #[test]
    fn who_ladder() {
        assert_eq!(
            who(Evidence::hard(COMMUNITY_TRANSMISSION, "yes"), false).unwrap(),
            WhoLevel::CommunityTransmission
        );
        assert_eq!(
            who(
                Evidence::hard(LOCAL_TRANSMISSION, "yes").with_hard(COMMUNITY_TRANSMISSION, "no"),
                false
            )
            .unwrap(),
            WhoLevel::LocalTransmission
        );
        assert_eq!(
            who(
                Evidence::hard(IMPORTED_CASES, "few").with_hard(LOCAL_TRANSMISSION, "no"),
                false
            )
            .unwrap(),
            WhoLevel::ImportedCases
        );
        let quiet = Evidence::hard(IMPORTED_CASES, "none")
            .with_hard(LOCAL_TRANSMISSION, "no")
            .with_hard(COMMUNITY_TRANSMISSION, "no");
        assert_eq!(who(quiet.clone(), false).unwrap(), WhoLevel::Preparedness);
        let watch = quiet.with_hard(TRANSMISSIBILITY, "4");
        assert_eq!(who(watch.clone(), false).unwrap(), WhoLevel::Preparedness);
        assert_eq!(who(watch, true).unwrap(), WhoLevel::HighRiskImported);
        assert_eq!(who(Evidence::new(), false).unwrap(), WhoLevel::Preparedness);
        assert_eq!(WhoLevel::CommunityTransmission.number(), 1);
        assert_eq!(WhoLevel::Preparedness.number(), 5);
    }

    #[test]
    fn who_rejects_contradictions_and_foreign_nodes() {
        let impossible = Evidence::hard(COMMUNITY_TRANSMISSION, "yes").with_hard(LOCAL_TRANSMISSION, "no");
        assert!(matches!(who(impossible, false), Err(PreparednessError::Contradictory)));
        assert!(matches!(
            who(Evidence::hard("Weather", "rain"), false),
            Err(PreparednessError::NotTemplateNode(_))
        ));
    }

    #[test]
    fn severity_staging() {
        let data = |t, s| {
            severity_stage(&SeverityAssessment::DataRich {
                transmissibility: t,
                severity: s,
            })
        };
        assert_eq!(data(1, 1).unwrap(), ImpactCategory::Low);
        assert_eq!(data(5, 7).unwrap(), ImpactCategory::Extreme);
        assert_eq!(data(3, 3).unwrap(), ImpactCategory::Moderate);
        assert_eq!(data(4, 1).unwrap(), ImpactCategory::High);
        assert_eq!(data(1, 5).unwrap(), ImpactCategory::High);
        assert!(matches!(
            data(0, 1),
            Err(PreparednessError::TransmissibilityOutOfRange(0))
        ));
        assert!(matches!(data(1, 8), Err(PreparednessError::SeverityOutOfRange(8))));
        let early = |t, s| {
            severity_stage(&SeverityAssessment::Early {
                transmissibility: t,
                severity: s,
            })
            .unwrap()
        };
        assert_eq!(
            early(CoarseScore::ModerateHigh, CoarseScore::ModerateHigh),
            ImpactCategory::High
        );
        assert_eq!(
            early(CoarseScore::LowModerate, CoarseScore::LowModerate),
            ImpactCategory::Moderate
        );
    }

    #[test]
    fn severity_stage_monotone() {
        for t in 1..=5u8 {
            for s in 1..=7u8 {
                let here = severity_stage(&SeverityAssessment::DataRich {
                    transmissibility: t,
                    severity: s,
                })
                .unwrap();
                if t < 5 {
                    let up = severity_stage(&SeverityAssessment::DataRich {
                        transmissibility: t + 1,
                        severity: s,
                    })
                    .unwrap();
                    assert!(up >= here);
                }
                if s < 7 {
                    let up = severity_stage(&SeverityAssessment::DataRich {
                        transmissibility: t,
                        severity: s + 1,
                    })
                    .unwrap();
                    assert!(up >= here);
                }
            }
        }
    }

    #[test]
    fn epi_index_examples() {
        assert_eq!(
            epi_index(&EpiSubIndexes::uniform(1.0), &[0.1, 0.2, 0.3, 0.15, 0.25]).unwrap(),
            1.0
        );
        assert!((epi_index(&EpiSubIndexes::uniform(0.5), &EQUAL_EPI_WEIGHTS).unwrap() - 0.5).abs() < 1e-15);
        let sub = EpiSubIndexes {
            public_health_infrastructure: 0.3,
            ..EpiSubIndexes::uniform(0.9)
        };
        assert_eq!(epi_index(&sub, &[1.0, 0.0, 0.0, 0.0, 0.0]).unwrap(), 0.3);
        assert!(matches!(
            epi_index(&sub, &[0.5, 0.0, 0.0, 0.0, 0.0]),
            Err(PreparednessError::InvalidWeights(_))
        ));
        assert!(matches!(
            epi_index(&EpiSubIndexes::uniform(1.2), &EQUAL_EPI_WEIGHTS),
            Err(PreparednessError::SubIndexOutOfRange(_))
        ));
    }

    #[test]
    fn install_rows_by_partial_binding() {
        let net = default_outbreak_network();
        let row = [0.2, 0.3, 0.5];
        let binding = SirBinding {
            variable: OUTBREAK_RISK.into(),
            parents: BTreeMap::from([(COMMUNITY_TRANSMISSION.to_owned(), "yes".to_owned())]),
        };
        let bound = install_sir_row(&net, &row, &binding).unwrap();
        let risk = bound.index_of(OUTBREAK_RISK).unwrap();
        assert_eq!(bound.row(risk, 0), &row);
        assert_eq!(bound.row(risk, 34), &row);
        assert_eq!(bound.row(risk, 35), net.row(risk, 35));

        let all = install_sir_row(&net, &row, &SirBinding::default()).unwrap();
        let post = posterior_exact(&all, &Evidence::new(), OUTBREAK_RISK).unwrap();
        for (a, b) in post.iter().zip(row) {
            assert!((a - b).abs() < 1e-12);
        }

        let root = SirBinding {
            variable: IMPORTED_CASES.into(),
            parents: BTreeMap::new(),
        };
        assert!(install_sir_row(&net, &[0.1, 0.2, 0.7], &root).is_ok());
        assert!(install_sir_row(&net, &[0.5, 0.5], &root).is_err());
    }
}
