//! Multinomial outcome sampling.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::rng::{self, Purpose};

fn check_distribution(probs: &[f64]) -> Result<()> {
    if probs.is_empty() || probs.iter().any(|p| !p.is_finite() || *p < -1e-12) {
        return Err(Error::InvalidArgument(
            "probabilities must be finite and non-negative".into(),
        ));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "probabilities sum to {total}, expected 1"
        )));
    }
    Ok(())
}

/// Multinomial counts for `shots` draws, using `rng`.
///
/// Drawn as a chain of conditional binomials, so the cost does not grow with
/// `shots`.
pub fn sample_with<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Result<Vec<u64>> {
    check_distribution(probs)?;
    let mut counts = vec![0u64; probs.len()];
    let mut left = shots;
    let mut mass = 1.0f64;
    for (k, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if k + 1 == probs.len() {
            counts[k] = left;
            break;
        }
        let p = p.max(0.0);
        let cond = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let n = Binomial::new(left, cond)
            .expect("conditional probability lies in [0, 1]")
            .sample(rng);
        counts[k] = n;
        left -= n;
        mass -= p;
    }
    Ok(counts)
}

/// Multinomial counts, reproducible for a fixed `seed`.
pub fn sample_outcomes(probs: &[f64], shots: u64, seed: u64) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    sample_with(probs, shots, &mut rng::stream(seed, Purpose::Sampling, 0))
}
