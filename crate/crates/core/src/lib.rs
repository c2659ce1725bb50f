//! Two-parameter qubit estimation with a tunable scrambling rotation.
//!
//! The crate covers the full chain from state preparation to simulated
//! measurements:
//!
//! * [`state`]: probe preparation, encoding unitaries and derivative states.
//! * [`fisher`]: quantum Fisher information, SLD incompatibility, sloppiness.
//! * [`bounds`]: SLD, Holevo/Nagaoka and sequential precision bounds.
//! * [`optimize`]: the `det Q` landscape and its global maximum.
//! * [`measure`]: POVMs, classical Fisher information, Monte-Carlo MLE.
//! * [`record`], [`sweep`], [`check`]: flat output, grid sweeps and the
//!   reproduction suite used by the command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod check;
pub mod error;
pub mod fisher;
pub mod linalg;
pub mod measure;
pub mod optimize;
pub mod record;
pub mod rng;
pub mod simplex;
pub mod state;
pub mod sweep;

#[cfg(test)]
mod testutil;

pub use bounds::{hierarchy_report, BoundsReport, WeightMatrix};
pub use error::{Error, Result};
pub use fisher::{ExtReal, ModelScalars, MucMatrix, QfimMatrix};
pub use measure::{ClassicalFim, Estimator, McExperiment, McReport, Povm, SequentialReport};
pub use optimize::{OptimumReport, StationaryCase};
pub use record::{OutputFormat, OutputRecord};
pub use state::{EncodingConfig, HermitianOp, StateVector, Tangent, UnitaryMatrix};
pub use sweep::{AngleRange, SweepSpec};
