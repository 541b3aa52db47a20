//! Stochastic-parameter SIR ensembles and their discretization into
//! conditional table rows.

mod ensemble;
mod sir;

use thiserror::Error;

pub use ensemble::{
    discretize_to_cpt, read_summary_csv, sample_ensemble, EnsembleMember, ParamPrior, Range, Statistic,
    TrajectoryEnsemble,
};
pub use sir::{simulate_sir, simulate_summary, SirParams, Trajectory, TrajectorySummary};

#[derive(Debug, Error)]
pub enum EpiError {
    #[error("invalid SIR parameters: {0}")]
    InvalidParams(String),
    #[error("invalid parameter prior: {0}")]
    InvalidPrior(String),
    #[error("negative compartment at step {step} with dt = {dt}; use a smaller dt")]
    StepTooLarge { step: usize, dt: f64 },
    #[error("ensemble must contain at least one draw")]
    EmptyEnsemble,
    #[error("at least one bin threshold is required")]
    EmptyBins,
    #[error("bin thresholds must be strictly increasing")]
    UnsortedBins,
    #[error("ensemble export failed: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
