use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sir::{simulate_sir, simulate_summary, SirParams, Trajectory, TrajectorySummary};
use super::EpiError;

/// Closed interval for a uniform prior; `low == high` is a point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub low: f64,
    pub high: f64,
}

impl Range {
    pub fn new(low: f64, high: f64) -> Self {
        Self { low, high }
    }

    pub fn point(x: f64) -> Self {
        Self { low: x, high: x }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.low == self.high {
            self.low
        } else {
            rng.gen_range(self.low..=self.high)
        }
    }
}

/// Independent uniform priors over the transmission and recovery rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamPrior {
    pub beta: Range,
    pub gamma: Range,
}

impl ParamPrior {
    pub fn point(beta: f64, gamma: f64) -> Self {
        Self {
            beta: Range::point(beta),
            gamma: Range::point(gamma),
        }
    }

    pub fn validate(&self) -> Result<(), EpiError> {
        let ok = |r: &Range| r.low.is_finite() && r.high.is_finite() && r.low <= r.high;
        if !ok(&self.beta) || !ok(&self.gamma) {
            return Err(EpiError::InvalidPrior("bounds must be finite with low <= high".into()));
        }
        if self.beta.low < 0.0 {
            return Err(EpiError::InvalidPrior("beta must be >= 0".into()));
        }
        if self.gamma.low <= 0.0 {
            return Err(EpiError::InvalidPrior("gamma must be > 0".into()));
        }
        Ok(())
    }
}

/// One parameter draw and the statistics of its trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMember {
    pub beta: f64,
    pub gamma: f64,
    #[serde(flatten)]
    pub summary: TrajectorySummary,
}

/// Monte Carlo SIR ensemble. Only per-draw statistics are kept; full
/// trajectories are recomputed on demand since simulation is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEnsemble {
    pub base: SirParams,
    pub seed: u64,
    pub members: Vec<EnsembleMember>,
}

impl TrajectoryEnsemble {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn params(&self, i: usize) -> SirParams {
        let m = &self.members[i];
        SirParams {
            beta: m.beta,
            gamma: m.gamma,
            ..self.base
        }
    }

    pub fn trajectory(&self, i: usize) -> Result<Trajectory, EpiError> {
        simulate_sir(&self.params(i))
    }

    pub fn values(&self, statistic: Statistic) -> Vec<f64> {
        self.members.iter().map(|m| statistic.of(&m.summary)).collect()
    }

    /// Writes one CSV row per draw: beta, gamma, peak_infected, attack_rate, peak_time.
    pub fn export_csv<W: io::Write>(&self, writer: W) -> Result<(), EpiError> {
        let mut w = csv::Writer::from_writer(writer);
        for m in &self.members {
            w.serialize(CsvRow::from(*m))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads rows written by [`TrajectoryEnsemble::export_csv`].
pub fn read_summary_csv<R: io::Read>(reader: R) -> Result<Vec<EnsembleMember>, EpiError> {
    csv::Reader::from_reader(reader)
        .deserialize::<CsvRow>()
        .map(|r| r.map(EnsembleMember::from).map_err(EpiError::from))
        .collect()
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    beta: f64,
    gamma: f64,
    peak_infected: f64,
    attack_rate: f64,
    peak_time: f64,
}

impl From<EnsembleMember> for CsvRow {
    fn from(m: EnsembleMember) -> Self {
        Self {
            beta: m.beta,
            gamma: m.gamma,
            peak_infected: m.summary.peak_infected,
            attack_rate: m.summary.attack_rate,
            peak_time: m.summary.peak_time,
        }
    }
}

impl From<CsvRow> for EnsembleMember {
    fn from(r: CsvRow) -> Self {
        Self {
            beta: r.beta,
            gamma: r.gamma,
            summary: TrajectorySummary {
                peak_infected: r.peak_infected,
                attack_rate: r.attack_rate,
                peak_time: r.peak_time,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    PeakInfected,
    AttackRate,
    PeakTime,
}

impl Statistic {
    pub fn of(self, s: &TrajectorySummary) -> f64 {
        match self {
            Self::PeakInfected => s.peak_infected,
            Self::AttackRate => s.attack_rate,
            Self::PeakTime => s.peak_time,
        }
    }
}

/// Draws `n` parameter sets and simulates each. Draw `i` uses ChaCha stream `i`
/// of `seed`, so the ensemble does not depend on thread scheduling.
pub fn sample_ensemble(
    prior: &ParamPrior,
    base: &SirParams,
    n: usize,
    seed: u64,
) -> Result<TrajectoryEnsemble, EpiError> {
    if n == 0 {
        return Err(EpiError::EmptyEnsemble);
    }
    prior.validate()?;
    base.validate()?;
    let members = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let beta = prior.beta.sample(&mut rng);
            let gamma = prior.gamma.sample(&mut rng);
            let params = SirParams { beta, gamma, ..*base };
            Ok(EnsembleMember {
                beta,
                gamma,
                summary: simulate_summary(&params)?,
            })
        })
        .collect::<Result<Vec<_>, EpiError>>()?;
    Ok(TrajectoryEnsemble {
        base: *base,
        seed,
        members,
    })
}

/// Bin-occupancy frequencies of `statistic` over the ensemble.
///
/// `thresholds` t1 < .. < tk define k+1 bins: (-inf, t1), [t1, t2), .., [tk, inf).
pub fn discretize_to_cpt(
    ensemble: &TrajectoryEnsemble,
    statistic: Statistic,
    thresholds: &[f64],
) -> Result<Vec<f64>, EpiError> {
    if thresholds.is_empty() {
        return Err(EpiError::EmptyBins);
    }
    if thresholds.iter().any(|t| t.is_nan()) || thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EpiError::UnsortedBins);
    }
    if ensemble.is_empty() {
        return Err(EpiError::EmptyEnsemble);
    }
    let mut counts = vec![0usize; thresholds.len() + 1];
    for m in &ensemble.members {
        let x = statistic.of(&m.summary);
        counts[thresholds.partition_point(|&t| t <= x)] += 1;
    }
    let n = ensemble.len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / n).collect())
}
