//! Admiralty-style grading of evidence.
//!
//! A grade pairs source reliability (A = completely reliable .. E = unreliable,
//! F = cannot be judged) with information credibility (1 = confirmed ..
//! 5 = improbable, 6 = cannot be judged). Grades render as two characters,
//! e.g. `C4`, and discount observations before they reach inference.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bayes::{BayesError, CausalNetwork, Evidence};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AdmiraltyError {
    #[error("invalid grade `{0}`: expected a reliability letter A-F followed by a credibility digit 1-6")]
    InvalidGrade(String),
    #[error("duplicate state id `{0}`")]
    DuplicateState(String),
    #[error("no states to classify")]
    EmptyBatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Reliability {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl Reliability {
    pub const ALL: [Reliability; 6] = [Self::A, Self::B, Self::C, Self::D, Self::E, Self::F];

    pub fn letter(self) -> char {
        (b'A' + self as u8) as char
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::A => "Completely reliable",
            Self::B => "Usually reliable",
            Self::C => "Fairly reliable",
            Self::D => "Not usually reliable",
            Self::E => "Unreliable",
            Self::F => "Reliability cannot be judged",
        }
    }

    /// Discount factor of the source.
    pub fn weight(self) -> f64 {
        match self {
            Self::A => 1.0,
            Self::B => 0.8,
            Self::C => 0.6,
            Self::D => 0.4,
            Self::E => 0.2,
            Self::F => 0.5,
        }
    }

    fn from_char(c: char) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.letter() == c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Credibility {
    Confirmed = 1,
    ProbablyTrue = 2,
    PossiblyTrue = 3,
    DoubtfullyTrue = 4,
    Improbable = 5,
    CannotBeJudged = 6,
}

impl Credibility {
    pub const ALL: [Credibility; 6] = [
        Self::Confirmed,
        Self::ProbablyTrue,
        Self::PossiblyTrue,
        Self::DoubtfullyTrue,
        Self::Improbable,
        Self::CannotBeJudged,
    ];

    pub fn digit(self) -> u8 {
        self as u8
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Confirmed => "Confirmed by other sources",
            Self::ProbablyTrue => "Probably true",
            Self::PossiblyTrue => "Possibly true",
            Self::DoubtfullyTrue => "Doubtful true",
            Self::Improbable => "Improbable",
            Self::CannotBeJudged => "Truth cannot be judged",
        }
    }

    /// Discount factor of the information.
    pub fn weight(self) -> f64 {
        match self {
            Self::Confirmed => 1.0,
            Self::ProbablyTrue => 0.8,
            Self::PossiblyTrue => 0.6,
            Self::DoubtfullyTrue => 0.4,
            Self::Improbable => 0.2,
            Self::CannotBeJudged => 0.5,
        }
    }

    fn from_digit(d: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.digit() == d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AdmiraltyGrade {
    pub reliability: Reliability,
    pub credibility: Credibility,
}

impl AdmiraltyGrade {
    pub fn new(reliability: Reliability, credibility: Credibility) -> Self {
        Self {
            reliability,
            credibility,
        }
    }

    /// All 36 grades, row-major: A1, A2, .., F6.
    pub fn all() -> impl Iterator<Item = AdmiraltyGrade> {
        Reliability::ALL
            .into_iter()
            .flat_map(|r| Credibility::ALL.into_iter().map(move |c| Self::new(r, c)))
    }

    /// Grades whose source or information cannot be relied on for a decision.
    pub fn is_high_risk(self) -> bool {
        matches!(self.reliability, Reliability::D | Reliability::E | Reliability::F)
            || matches!(self.credibility, Credibility::Improbable | Credibility::CannotBeJudged)
    }
}

impl fmt::Display for AdmiraltyGrade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.reliability.letter(), self.credibility.digit())
    }
}

impl FromStr for AdmiraltyGrade {
    type Err = AdmiraltyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = || AdmiraltyError::InvalidGrade(s.to_owned());
        let mut chars = s.trim().chars();
        let (Some(r), Some(c), None) = (chars.next(), chars.next(), chars.next()) else {
            return Err(invalid());
        };
        let reliability = Reliability::from_char(r.to_ascii_uppercase()).ok_or_else(invalid)?;
        let digit = c.to_digit(10).ok_or_else(invalid)? as u8;
        let credibility = Credibility::from_digit(digit).ok_or_else(invalid)?;
        Ok(Self::new(reliability, credibility))
    }
}

impl Serialize for AdmiraltyGrade {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AdmiraltyGrade {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Evidence weight in `[0, 1]`: reliability weight times credibility weight.
pub fn grade_weight(grade: AdmiraltyGrade) -> f64 {
    grade.reliability.weight() * grade.credibility.weight()
}

/// An externally ingested observation together with its grade and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradedEvidence {
    pub evidence: Evidence,
    pub grade: AdmiraltyGrade,
    pub source: String,
    pub timestamp: DateTime<Utc>,
}

impl GradedEvidence {
    pub fn new(evidence: Evidence, grade: AdmiraltyGrade, source: impl Into<String>) -> Self {
        Self {
            evidence,
            grade,
            source: source.into(),
            timestamp: Utc::now(),
        }
    }

    pub fn weight(&self) -> f64 {
        grade_weight(self.grade)
    }
}

/// Converts graded evidence into soft evidence.
///
/// A hard observation of state `k` becomes a likelihood of 1 at `k` and
/// `1 - w` elsewhere, so `w = 1` reproduces the hard observation and `w = 0`
/// carries no information. A soft likelihood `l` is discounted the same way
/// after scaling its maximum to 1: `w * l / max(l) + (1 - w)`.
pub fn discount_to_likelihood(net: &CausalNetwork, graded: &GradedEvidence) -> Result<Evidence, BayesError> {
    discount_evidence(net, &graded.evidence, graded.weight())
}

/// [`discount_to_likelihood`] with an explicit weight in `[0, 1]` (clamped).
pub fn discount_evidence(net: &CausalNetwork, evidence: &Evidence, weight: f64) -> Result<Evidence, BayesError> {
    let w = weight.clamp(0.0, 1.0);
    // validates lengths, labels and duplicates
    evidence.likelihoods(net)?;
    let mut out = Evidence::new();
    for (var, state) in &evidence.hard {
        let idx = net.index_of(var)?;
        let k = net.state_index(idx, state)?;
        let lik = (0..net.cardinality(idx))
            .map(|s| if s == k { 1.0 } else { 1.0 - w })
            .collect();
        out.soft.insert(var.clone(), lik);
    }
    for (var, lik) in &evidence.soft {
        let max = lik.iter().copied().fold(0.0, f64::max);
        let discounted = lik.iter().map(|l| w * l / max + (1.0 - w)).collect();
        out.soft.insert(var.clone(), discounted);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemState {
    pub id: String,
    pub grade: AdmiraltyGrade,
}

impl SystemState {
    pub fn new(id: impl Into<String>, grade: AdmiraltyGrade) -> Self {
        Self { id: id.into(), grade }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatePartition {
    pub usable: BTreeSet<String>,
    pub high_risk: BTreeSet<String>,
}

/// Splits graded system states into those usable for decision making and
/// those that would lead to high-risk decisions.
pub fn classify_states(states: &[SystemState]) -> Result<StatePartition, AdmiraltyError> {
    if states.is_empty() {
        return Err(AdmiraltyError::EmptyBatch);
    }
    let mut partition = StatePartition::default();
    for s in states {
        if partition.usable.contains(&s.id) || partition.high_risk.contains(&s.id) {
            return Err(AdmiraltyError::DuplicateState(s.id.clone()));
        }
        let bucket = if s.grade.is_high_risk() {
            &mut partition.high_risk
        } else {
            &mut partition.usable
        };
        bucket.insert(s.id.clone());
    }
    Ok(partition)
}
