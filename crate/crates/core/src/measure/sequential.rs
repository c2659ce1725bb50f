//! Two-step strategy: estimate `lambda1` with part of the shots while
//! `lambda2` is unknown, then `lambda2` with the rest and `lambda1` fixed at
//! its first-step estimate.

use rayon::prelude::*;
use serde::Serialize;

use super::mle::{mle_estimate_with, mle_lambda2, Estimator};
use super::montecarlo::{EstimateStats, MIN_REPEATS};
use super::nagaoka::TangentFrame;
use super::povm::{outcome_probabilities, Povm};
use super::sampling::sample_with;
use crate::bounds::{allocation_bound, sequential_bounds};
use crate::error::{Error, Result};
use crate::fisher::{self, SINGULAR_DET};
use crate::rng::{self, Purpose};
use crate::state::{encode, encode_derivatives, EncodingConfig};

/// Weight of the `lambda2`-sensitive projector mixed into the first-step
/// measurement. The ideal first-step measurement has a rank-one Fisher
/// matrix, so the joint likelihood needs a little information on `lambda2`.
pub const STEP1_MIXING: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SequentialReport {
    pub shots: u64,
    pub allocation: f64,
    pub shots_step1: u64,
    pub shots_step2: u64,
    pub repeats: usize,
    pub successful_repeats: usize,
    pub failed_repeats: usize,
    pub var_lambda1: f64,
    pub var_lambda2: f64,
    pub bias: [f64; 2],
    /// `shots * (Var l1 + Var l2)`.
    pub scaled_total_variance: f64,
    pub scaled_variance_stderr: f64,
    pub k1: f64,
    pub k2: f64,
    /// `2 [Q^-1]_11 / (2 a) + 1 / (Q22 (1 - a))` with allocation `a`; equals
    /// `k1` at `a = 1/2`.
    pub k1_at_allocation: f64,
    /// Lower bound `2 sqrt(s) / sqrt(a (1 - a))`.
    pub allocation_bound: f64,
    pub seed: u64,
}

/// The two measurements used by the strategy, designed at `cfg`.
///
/// Step 1 measures mostly along the tangent direction blind to `lambda2`
/// (weight `1 - STEP1_MIXING`) and a little along `dr/dlambda2`; step 2 is the
/// projective measurement along `dr/dlambda2`.
pub fn sequential_povms(cfg: &EncodingConfig) -> Result<(Povm, Povm)> {
    let es = encode_derivatives(cfg)?;
    let (q, _) = fisher::qfim_and_muc(cfg)?;
    if q.det() <= SINGULAR_DET {
        return Err(Error::SingularModel { det_q: q.det() });
    }
    let frame = TangentFrame::at(&es);
    // tangent coordinates of dr/dlambda2 and of its in-plane normal
    let d2 = [frame.a[0][1], frame.a[1][1]];
    let along = frame.direction(d2);
    let across = frame.direction([-d2[1], d2[0]]);
    let w = STEP1_MIXING;
    let step1 = Povm::from_bloch(&[
        (1.0 - w, across),
        (1.0 - w, across.map(|v| -v)),
        (w, along),
        (w, along.map(|v| -v)),
    ])?;
    let step2 = Povm::projective(along)?;
    Ok((step1, step2))
}

/// Runs `repeats` independent two-step experiments with `shots` total shots
/// each, a fraction `allocation` of them spent in step 1.
///
/// For a singular model the measurements cannot be designed; step 1 then uses
/// the tetrahedral POVM and its likelihood reports the degeneracy.
pub fn sequential_experiment(
    cfg: &EncodingConfig,
    shots: u64,
    allocation: f64,
    repeats: usize,
    seed: u64,
) -> Result<SequentialReport> {
    cfg.validate()?;
    if !(allocation > 0.0 && allocation < 1.0) {
        return Err(Error::InvalidAllocation(allocation));
    }
    if shots < 2 || !shots.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "total shots must be even and positive, got {shots}"
        )));
    }
    if repeats < MIN_REPEATS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_REPEATS} repeats, got {repeats}"
        )));
    }
    let shots1 = ((allocation * shots as f64).round() as u64).clamp(1, shots - 1);
    let shots2 = shots - shots1;

    let (step1, step2) = match sequential_povms(cfg) {
        Ok(p) => p,
        Err(Error::SingularModel { .. }) => (Povm::tetrahedral(), Povm::z_basis()),
        Err(e) => return Err(e),
    };
    let psi = encode(cfg)?;
    let p1 = outcome_probabilities(&psi, &step1);

    let outcomes: Vec<Result<[f64; 2]>> = (0..repeats)
        .into_par_iter()
        .map(|r| {
            let mut rng1 = rng::stream(seed, Purpose::SequentialStep1, r as u64);
            let c1 = sample_with(&p1, shots1, &mut rng1)?;
            // profile likelihood: the joint maximizer's lambda1 component
            let l1 = mle_estimate_with(cfg, &step1, &c1, Estimator::MleRefined)?.lambda[0];
            let mut rng2 = rng::stream(seed, Purpose::SequentialStep2, r as u64);
            let p2 = outcome_probabilities(&psi, &step2);
            let c2 = sample_with(&p2, shots2, &mut rng2)?;
            let l2 = mle_lambda2(cfg, l1, &step2, &c2)?;
            Ok([l1, l2])
        })
        .collect();

    let mut estimates = Vec::with_capacity(repeats);
    let mut first_error = None;
    for o in outcomes {
        match o {
            Ok(e) => estimates.push(e),
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    let Some(stats) = EstimateStats::from_estimates(&estimates, shots as f64) else {
        return Err(first_error.unwrap_or(Error::SearchFailed));
    };

    let (q, _) = fisher::qfim_and_muc(cfg)?;
    let (k1, k2) = sequential_bounds(&q)?;
    let inv = q.inverse().ok_or(Error::SingularModel { det_q: q.det() })?;
    Ok(SequentialReport {
        shots,
        allocation,
        shots_step1: shots1,
        shots_step2: shots2,
        repeats,
        successful_repeats: estimates.len(),
        failed_repeats: repeats - estimates.len(),
        var_lambda1: stats.covariance[0][0],
        var_lambda2: stats.covariance[1][1],
        bias: [stats.mean[0] - cfg.lambda1, stats.mean[1] - cfg.lambda2],
        scaled_total_variance: stats.scaled_total_variance,
        scaled_variance_stderr: stats.scaled_variance_stderr,
        k1,
        k2,
        k1_at_allocation: inv[0][0] / allocation + 1.0 / (q.q22 * (1.0 - allocation)),
        allocation_bound: allocation_bound(1.0 / q.det(), allocation)?,
        seed,
    })
}
