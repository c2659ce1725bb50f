//! Measurement simulation: POVMs, classical Fisher information, optimal and
//! numerically searched measurements, sampling and maximum-likelihood
//! experiments.

pub mod fim;
pub mod mle;
pub mod montecarlo;
pub mod nagaoka;
pub mod povm;
pub mod sampling;
pub mod sequential;

pub use fim::{classical_fim, ClassicalFim};
pub use mle::{mle_estimate, mle_estimate_with, Estimator, MleEstimate};
pub use montecarlo::{monte_carlo_covariance, McExperiment, McReport};
pub use nagaoka::{nagaoka_numeric, optimal_povm, NagaokaSearch};
pub use povm::{outcome_probabilities, validate_povm, Povm, PovmSpec};
pub use sampling::sample_outcomes;
pub use sequential::{sequential_experiment, SequentialReport};
