//! Decision support for epidemic preparedness.
//!
//! Probabilistic reasoning over discrete causal networks, Admiralty-style
//! grading of evidence, SIR ensembles discretized into conditional tables,
//! risk and bias measures, and pooling of expert posteriors.

pub mod admiralty;
pub mod bayes;
pub mod consensus;
pub mod epi;
pub mod preparedness;
pub mod risk;
