//! Classical Fisher information of a POVM on the encoded state.

use serde::Serialize;

use super::povm::Povm;
use crate::bounds::WeightMatrix;
use crate::error::{Error, Result};
use crate::state::{encode_derivatives, EncodedState, EncodingConfig};

/// Outcomes with probability at or below this are treated as impossible.
pub const VANISHING_PROB: f64 = 1e-12;
/// ... and skipped only when their derivative is also below this.
pub const VANISHING_DERIV: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalFim {
    pub f11: f64,
    pub f12: f64,
    pub f22: f64,
}

impl ClassicalFim {
    pub fn det(&self) -> f64 {
        self.f11 * self.f22 - self.f12 * self.f12
    }

    pub fn as_array(&self) -> [[f64; 2]; 2] {
        [[self.f11, self.f12], [self.f12, self.f22]]
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        crate::linalg::sym_eigen(self.as_array()).0
    }

    pub fn inverse(&self) -> Option<[[f64; 2]; 2]> {
        let det = self.det();
        if !(det > 0.0) {
            return None;
        }
        Some([
            [self.f22 / det, -self.f12 / det],
            [-self.f12 / det, self.f11 / det],
        ])
    }

    /// `Tr[W F^{-1}]`, `None` when `F` is singular.
    pub fn weighted_inverse_trace(&self, w: &WeightMatrix) -> Option<f64> {
        self.inverse().map(|inv| w.trace_with(inv))
    }
}

/// `dp_k / dlambda_mu = 2 Re <d_mu psi|Pi_k|psi>` for every outcome.
pub fn probability_derivatives(es: &EncodedState, povm: &Povm) -> Vec<[f64; 2]> {
    let psi = es.psi.as_vector();
    povm.elements()
        .iter()
        .map(|e| {
            let ep = e * psi;
            [
                2.0 * es.dpsi[0].as_vector().dotc(&ep).re,
                2.0 * es.dpsi[1].as_vector().dotc(&ep).re,
            ]
        })
        .collect()
}

/// `F_{mu nu} = sum_k dp_k/dmu dp_k/dnu / p_k`.
pub fn classical_fim_from_state(es: &EncodedState, povm: &Povm) -> Result<ClassicalFim> {
    let probs = super::povm::outcome_probabilities(&es.psi, povm);
    let derivs = probability_derivatives(es, povm);
    let mut f = ClassicalFim {
        f11: 0.0,
        f12: 0.0,
        f22: 0.0,
    };
    for (k, (&p, d)) in probs.iter().zip(&derivs).enumerate() {
        if p <= VANISHING_PROB {
            if d[0].abs() > VANISHING_DERIV || d[1].abs() > VANISHING_DERIV {
                return Err(Error::IllConditioned { outcome: k });
            }
            continue;
        }
        f.f11 += d[0] * d[0] / p;
        f.f12 += d[0] * d[1] / p;
        f.f22 += d[1] * d[1] / p;
    }
    Ok(f)
}

pub fn classical_fim(cfg: &EncodingConfig, povm: &Povm) -> Result<ClassicalFim> {
    classical_fim_from_state(&encode_derivatives(cfg)?, povm)
}
