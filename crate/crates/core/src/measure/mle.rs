//! Maximum-likelihood estimation of `(lambda1, lambda2)` from outcome counts.

use serde::{Deserialize, Serialize};

use super::povm::{outcome_probabilities, Povm};
use crate::error::{Error, Result};
use crate::simplex::{self, SimplexOptions};
use crate::state::{encode, EncodingConfig};

/// Half-width of the search box around the reference parameters.
pub const BOX_HALF_WIDTH: f64 = 0.5;
pub const GRID_POINTS: usize = 50;
/// Relative curvature below which the likelihood counts as flat.
pub const FLATNESS_RATIO: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// Best point of the coarse grid only.
    MleGrid,
    /// Grid followed by simplex refinement.
    #[default]
    MleRefined,
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mle-grid" => Ok(Estimator::MleGrid),
            "mle-refined" => Ok(Estimator::MleRefined),
            _ => Err(Error::InvalidArgument(format!("unknown estimator `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MleEstimate {
    pub lambda: [f64; 2],
    /// Log-likelihood divided by the number of shots.
    pub mean_log_likelihood: f64,
    /// Eigenvalues (ascending) of the negative Hessian of the mean
    /// log-likelihood at the estimate.
    pub curvature: [f64; 2],
}

fn log_likelihood(reference: &EncodingConfig, povm: &Povm, counts: &[u64], lambda: [f64; 2]) -> f64 {
    let cfg = reference.with_lambdas(lambda[0], lambda[1]);
    let Ok(psi) = encode(&cfg) else {
        return f64::NEG_INFINITY;
    };
    let p = outcome_probabilities(&psi, povm);
    counts
        .iter()
        .zip(&p)
        .filter(|(&n, _)| n > 0)
        .map(|(&n, &pk)| n as f64 * pk.max(1e-300).ln())
        .sum()
}

fn curvature(f: impl Fn([f64; 2]) -> f64, x: [f64; 2]) -> [f64; 2] {
    let h = 1e-4;
    let f0 = f(x);
    let at = |a: f64, b: f64| f([x[0] + a, x[1] + b]);
    let h11 = (at(h, 0.0) - 2.0 * f0 + at(-h, 0.0)) / (h * h);
    let h22 = (at(0.0, h) - 2.0 * f0 + at(0.0, -h)) / (h * h);
    let h12 = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
    crate::linalg::sym_eigen([[-h11, -h12], [-h12, -h22]]).0
}

/// Grid-plus-simplex MLE over the box `lambda_ref +- 0.5`, where
/// `lambda_ref` are the parameters stored in `reference`.
///
/// Fails with [`Error::DegenerateLikelihood`] when the likelihood is flat
/// along some direction at the estimate.
pub fn mle_estimate_with(
    reference: &EncodingConfig,
    povm: &Povm,
    counts: &[u64],
    estimator: Estimator,
) -> Result<MleEstimate> {
    reference.validate()?;
    if counts.len() != povm.len() {
        return Err(Error::InvalidArgument(format!(
            "{} counts for a {}-outcome POVM",
            counts.len(),
            povm.len()
        )));
    }
    let shots: u64 = counts.iter().sum();
    if shots == 0 {
        return Err(Error::InvalidArgument("no counts".into()));
    }
    let centre = [reference.lambda1, reference.lambda2];
    let mean_ll = |l: [f64; 2]| log_likelihood(reference, povm, counts, l) / shots as f64;
    let inside = |l: &[f64]| {
        (l[0] - centre[0]).abs() <= BOX_HALF_WIDTH && (l[1] - centre[1]).abs() <= BOX_HALF_WIDTH
    };

    let step = 2.0 * BOX_HALF_WIDTH / (GRID_POINTS - 1) as f64;
    let mut best = (f64::NEG_INFINITY, centre);
    for i in 0..GRID_POINTS {
        for j in 0..GRID_POINTS {
            let l = [
                centre[0] - BOX_HALF_WIDTH + i as f64 * step,
                centre[1] - BOX_HALF_WIDTH + j as f64 * step,
            ];
            let v = mean_ll(l);
            if v > best.0 {
                best = (v, l);
            }
        }
    }

    if estimator == Estimator::MleRefined {
        let total = shots as f64;
        let r = simplex::minimize(
            |x| {
                if !inside(x) {
                    return f64::INFINITY;
                }
                -log_likelihood(reference, povm, counts, [x[0], x[1]])
            },
            &best.1,
            &SimplexOptions {
                step: 0.5 * step,
                f_tol: 1e-8,
                x_tol: 1e-9,
                max_evals: 5_000,
            },
        );
        if -r.value / total >= best.0 {
            best = (-r.value / total, [r.x[0], r.x[1]]);
        }
    }

    let curv = curvature(mean_ll, best.1);
    if !(curv[1] > 0.0) || curv[0] <= FLATNESS_RATIO * curv[1] {
        return Err(Error::DegenerateLikelihood {
            min_curvature: curv[0],
            max_curvature: curv[1],
        });
    }
    Ok(MleEstimate {
        lambda: best.1,
        mean_log_likelihood: best.0,
        curvature: curv,
    })
}

/// Refined MLE of `(lambda1, lambda2)`.
pub fn mle_estimate(reference: &EncodingConfig, povm: &Povm, counts: &[u64]) -> Result<[f64; 2]> {
    mle_estimate_with(reference, povm, counts, Estimator::MleRefined).map(|e| e.lambda)
}

/// One-parameter MLE of `lambda2` with `lambda1` held at `lambda1`, over
/// `reference.lambda2 +- 0.5`.
pub fn mle_lambda2(
    reference: &EncodingConfig,
    lambda1: f64,
    povm: &Povm,
    counts: &[u64],
) -> Result<f64> {
    let shots: u64 = counts.iter().sum();
    if counts.len() != povm.len() || shots == 0 {
        return Err(Error::InvalidArgument("counts do not match POVM".into()));
    }
    let c = reference.lambda2;
    let ll = |l2: f64| log_likelihood(reference, povm, counts, [lambda1, l2]);
    let n = 4 * GRID_POINTS;
    let step = 2.0 * BOX_HALF_WIDTH / (n - 1) as f64;
    let mut best = (f64::NEG_INFINITY, c);
    for i in 0..n {
        let l = c - BOX_HALF_WIDTH + i as f64 * step;
        let v = ll(l);
        if v > best.0 {
            best = (v, l);
        }
    }
    let r = simplex::minimize(
        |x| {
            if (x[0] - c).abs() > BOX_HALF_WIDTH {
                f64::INFINITY
            } else {
                -ll(x[0])
            }
        },
        &[best.1],
        &SimplexOptions {
            step: 0.5 * step,
            f_tol: 1e-8,
            x_tol: 1e-10,
            max_evals: 2_000,
        },
    );
    let l2 = if -r.value >= best.0 { r.x[0] } else { best.1 };
    let h = 1e-4;
    let k = -(ll(l2 + h) - 2.0 * ll(l2) + ll(l2 - h)) / (h * h * shots as f64);
    if !(k > 1e-9) {
        return Err(Error::DegenerateLikelihood {
            min_curvature: k,
            max_curvature: k,
        });
    }
    Ok(l2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::WeightMatrix;
    use crate::measure::nagaoka::optimal_povm;
    use crate::measure::sampling::sample_outcomes;

    fn expected_counts(cfg: &EncodingConfig, povm: &Povm, m: u64) -> Vec<u64> {
        // rounded expectations: the MLE of exact frequencies is the truth
        let p = outcome_probabilities(&encode(cfg).unwrap(), povm);
        let mut c: Vec<u64> = p.iter().map(|v| (v * m as f64).round() as u64).collect();
        let s: u64 = c.iter().sum();
        c[0] = c[0] + m - s;
        c
    }

    fn truth() -> EncodingConfig {
        EncodingConfig::optimal().with_lambdas(0.2, 0.5)
    }

    #[test]
    fn exact_frequencies_recover_truth() {
        let cfg = truth();
        let povm = optimal_povm(&cfg, &WeightMatrix::identity()).unwrap();
        let counts = expected_counts(&cfg, &povm, 1 << 40);
        let est = mle_estimate(&cfg, &povm, &counts).unwrap();
        assert!((est[0] - 0.2).abs() < 1e-5 && (est[1] - 0.5).abs() < 1e-5, "{est:?}");
    }

    #[test]
    fn sampled_estimate_concentrates() {
        let cfg = truth();
        let povm = optimal_povm(&cfg, &WeightMatrix::identity()).unwrap();
        let p = outcome_probabilities(&encode(&cfg).unwrap(), &povm);
        let m = 100_000u64;
        let tol = 3.0 * (1.0 / (2.0 * m as f64)).sqrt();
        for seed in 0..5 {
            let counts = sample_outcomes(&p, m, seed).unwrap();
            let est = mle_estimate(&cfg, &povm, &counts).unwrap();
            assert!((est[0] - 0.2).abs() < tol && (est[1] - 0.5).abs() < tol, "{est:?}");
        }
    }

    #[test]
    fn grid_estimate_is_on_grid() {
        let cfg = truth();
        let povm = Povm::pauli();
        let counts = expected_counts(&cfg, &povm, 1_000_000);
        let e = mle_estimate_with(&cfg, &povm, &counts, Estimator::MleGrid).unwrap();
        let step = 1.0 / 49.0;
        let k = (e.lambda[0] - (0.2 - 0.5)) / step;
        assert!((k - k.round()).abs() < 1e-9);
        assert!((e.lambda[0] - 0.2).abs() <= step);
    }

    #[test]
    fn sloppy_model_is_degenerate() {
        let mut cfg = truth();
        cfg.gamma = 0.0;
        let povm = Povm::tetrahedral();
        let p = outcome_probabilities(&encode(&cfg).unwrap(), &povm);
        let counts = sample_outcomes(&p, 100_000, 1).unwrap();
        assert!(matches!(
            mle_estimate(&cfg, &povm, &counts),
            Err(Error::DegenerateLikelihood { .. })
        ));
    }

    #[test]
    fn two_outcome_povm_is_degenerate() {
        let cfg = truth();
        let povm = Povm::z_basis();
        let counts = expected_counts(&cfg, &povm, 100_000);
        assert!(matches!(
            mle_estimate(&cfg, &povm, &counts),
            Err(Error::DegenerateLikelihood { .. })
        ));
    }

    #[test]
    fn lambda2_only_estimate() {
        let cfg = truth();
        let povm = Povm::pauli();
        let counts = expected_counts(&cfg, &povm, 1 << 40);
        let l2 = mle_lambda2(&cfg, 0.2, &povm, &counts).unwrap();
        assert!((l2 - 0.5).abs() < 1e-5);
    }

    #[test]
    fn mismatched_counts_rejected() {
        let cfg = truth();
        assert!(mle_estimate(&cfg, &Povm::pauli(), &[1, 2]).is_err());
        assert!(mle_estimate(&cfg, &Povm::z_basis(), &[0, 0]).is_err());
    }

    #[test]
    fn estimator_names() {
        assert_eq!("mle-grid".parse::<Estimator>().unwrap(), Estimator::MleGrid);
        assert_eq!("mle-refined".parse::<Estimator>().unwrap(), Estimator::MleRefined);
        assert!("bayes".parse::<Estimator>().is_err());
    }
}
