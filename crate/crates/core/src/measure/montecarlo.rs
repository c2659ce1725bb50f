//! Repeated simulated experiments: sample, estimate, compare the empirical
//! covariance with the per-shot bounds.

use rayon::prelude::*;
use serde::Serialize;

use super::fim::classical_fim;
use super::mle::{mle_estimate_with, Estimator};
use super::povm::{outcome_probabilities, Povm};
use super::sampling::sample_with;
use crate::bounds::{hierarchy_report, WeightMatrix};
use crate::error::{Error, Result};
use crate::fisher::ExtReal;
use crate::rng::{self, Purpose};
use crate::state::{encode, EncodingConfig};

pub const MIN_SHOTS: u64 = 100;
pub const MIN_REPEATS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct McExperiment {
    pub cfg: EncodingConfig,
    pub povm: Povm,
    pub shots_per_repeat: u64,
    pub repeats: usize,
    pub seed: u64,
    pub estimator: Estimator,
}

impl McExperiment {
    pub fn new(
        cfg: EncodingConfig,
        povm: Povm,
        shots_per_repeat: u64,
        repeats: usize,
        seed: u64,
    ) -> Result<Self> {
        let exp = Self {
            cfg,
            povm,
            shots_per_repeat,
            repeats,
            seed,
            estimator: Estimator::MleRefined,
        };
        exp.validate()?;
        Ok(exp)
    }

    pub fn with_estimator(mut self, estimator: Estimator) -> Self {
        self.estimator = estimator;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        if self.shots_per_repeat < MIN_SHOTS {
            return Err(Error::InvalidArgument(format!(
                "need at least {MIN_SHOTS} shots per repeat, got {}",
                self.shots_per_repeat
            )));
        }
        if self.repeats < MIN_REPEATS {
            return Err(Error::InvalidArgument(format!(
                "need at least {MIN_REPEATS} repeats, got {}",
                self.repeats
            )));
        }
        Ok(())
    }
}

/// Sample statistics of a set of two-parameter estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateStats {
    pub mean: [f64; 2],
    /// Unbiased sample covariance.
    pub covariance: [[f64; 2]; 2],
    /// `shots * (Var l1 + Var l2)`.
    pub scaled_total_variance: f64,
    /// Standard error of `scaled_total_variance`.
    pub scaled_variance_stderr: f64,
}

impl EstimateStats {
    /// Needs at least two estimates.
    pub fn from_estimates(estimates: &[[f64; 2]], shots: f64) -> Option<Self> {
        let n = estimates.len();
        if n < 2 {
            return None;
        }
        let nf = n as f64;
        let mean = [0, 1].map(|i| estimates.iter().map(|e| e[i]).sum::<f64>() / nf);
        let mut cov = [[0.0; 2]; 2];
        for e in estimates {
            let d = [e[0] - mean[0], e[1] - mean[1]];
            for i in 0..2 {
                for j in 0..2 {
                    cov[i][j] += d[i] * d[j];
                }
            }
        }
        let cov = cov.map(|row| row.map(|v| v / (nf - 1.0)));
        let sq: Vec<f64> = estimates
            .iter()
            .map(|e| (e[0] - mean[0]).powi(2) + (e[1] - mean[1]).powi(2))
            .collect();
        let m = sq.iter().sum::<f64>() / nf;
        let var_sq = sq.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (nf - 1.0);
        Some(Self {
            mean,
            covariance: cov,
            scaled_total_variance: shots * (cov[0][0] + cov[1][1]),
            scaled_variance_stderr: shots * (var_sq / nf).sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub covariance: [[f64; 2]; 2],
    pub mean: [f64; 2],
    /// `mean - true value` per parameter.
    pub bias: [f64; 2],
    pub scaled_total_variance: f64,
    pub scaled_variance_stderr: f64,
    pub c_s: ExtReal,
    pub c_h: ExtReal,
    /// `Tr[F^{-1}]` of the POVM used, when its Fisher matrix is invertible.
    pub classical_bound: Option<f64>,
    pub shots_per_repeat: u64,
    pub repeats: usize,
    pub successful_repeats: usize,
    pub failed_repeats: usize,
    pub failures_excluded: bool,
    pub estimator: Estimator,
    pub seed: u64,
}

/// Runs the experiment. Repeats run in parallel but every repeat draws from
/// its own stream, and results are aggregated in repeat order.
///
/// Failed repeats are excluded and counted; if fewer than two succeed the
/// first failure is returned.
pub fn monte_carlo_covariance(exp: &McExperiment) -> Result<McReport> {
    exp.validate()?;
    let probs = outcome_probabilities(&encode(&exp.cfg)?, &exp.povm);
    let outcomes: Vec<Result<[f64; 2]>> = (0..exp.repeats)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(exp.seed, Purpose::Sampling, r as u64);
            let counts = sample_with(&probs, exp.shots_per_repeat, &mut rng)?;
            mle_estimate_with(&exp.cfg, &exp.povm, &counts, exp.estimator).map(|e| e.lambda)
        })
        .collect();

    let mut estimates = Vec::with_capacity(exp.repeats);
    let mut first_error = None;
    for o in outcomes {
        match o {
            Ok(e) => estimates.push(e),
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    let failed = exp.repeats - estimates.len();
    let Some(stats) = EstimateStats::from_estimates(&estimates, exp.shots_per_repeat as f64) else {
        return Err(first_error.unwrap_or(Error::SearchFailed));
    };

    let bounds = hierarchy_report(&exp.cfg, &WeightMatrix::identity())?;
    let classical_bound = classical_fim(&exp.cfg, &exp.povm)
        .ok()
        .and_then(|f| f.inverse())
        .map(|inv| inv[0][0] + inv[1][1]);
    Ok(McReport {
        covariance: stats.covariance,
        mean: stats.mean,
        bias: [
            stats.mean[0] - exp.cfg.lambda1,
            stats.mean[1] - exp.cfg.lambda2,
        ],
        scaled_total_variance: stats.scaled_total_variance,
        scaled_variance_stderr: stats.scaled_variance_stderr,
        c_s: bounds.c_s,
        c_h: bounds.c_h,
        classical_bound,
        shots_per_repeat: exp.shots_per_repeat,
        repeats: exp.repeats,
        successful_repeats: estimates.len(),
        failed_repeats: failed,
        failures_excluded: failed > 0,
        estimator: exp.estimator,
        seed: exp.seed,
    })
}
