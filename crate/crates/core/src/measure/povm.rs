//! Qubit POVMs: validation, stock measurements and the JSON file format.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMat2};
use crate::state::StateVector;

/// Tolerance for positivity and completeness checks.
pub const POVM_TOL: f64 = 1e-10;

pub const MIN_ELEMENTS: usize = 2;
pub const MAX_ELEMENTS: usize = 8;

/// A validated POVM with 2-8 elements.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<CMat2>,
}

/// Checks size, Hermiticity, positivity (eigenvalues `>= -tol`) and
/// completeness (`|sum - I| <= tol` elementwise).
pub fn validate_povm(elements: Vec<CMat2>, tol: f64) -> Result<Povm> {
    if !(MIN_ELEMENTS..=MAX_ELEMENTS).contains(&elements.len()) {
        return Err(Error::PovmSize(elements.len()));
    }
    let mut sum = CMat2::zeros();
    for (k, e) in elements.iter().enumerate() {
        if e.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidPovmElement {
                index: k,
                reason: "non-finite entry".into(),
            });
        }
        let herm = linalg::max_abs(&(e - e.adjoint()));
        if herm > tol {
            return Err(Error::InvalidPovmElement {
                index: k,
                reason: format!("not Hermitian (defect {herm:e})"),
            });
        }
        if linalg::hermitian_eigenvalues(e)[0] < -tol {
            return Err(Error::NotPositive(k));
        }
        sum += e;
    }
    let residual = linalg::max_abs(&(sum - linalg::identity()));
    if residual > tol {
        return Err(Error::NotComplete(residual));
    }
    Ok(Povm { elements })
}

impl Povm {
    pub fn new(elements: Vec<CMat2>) -> Result<Self> {
        validate_povm(elements, POVM_TOL)
    }

    /// Elements `w_k (I + n_k . sigma) / 2`.
    pub fn from_bloch(parts: &[(f64, [f64; 3])]) -> Result<Self> {
        let elements = parts
            .iter()
            .enumerate()
            .map(|(k, &(w, n))| bloch_element(k, w, n))
            .collect::<Result<Vec<_>>>()?;
        Self::new(elements)
    }

    /// Two-outcome projective measurement along the unit vector `n`.
    pub fn projective(n: [f64; 3]) -> Result<Self> {
        Self::from_bloch(&[(1.0, n), (1.0, n.map(|v| -v))])
    }

    pub fn z_basis() -> Self {
        Self::projective([0.0, 0.0, 1.0]).expect("valid")
    }

    pub fn x_basis() -> Self {
        Self::projective([1.0, 0.0, 0.0]).expect("valid")
    }

    pub fn y_basis() -> Self {
        Self::projective([0.0, 1.0, 0.0]).expect("valid")
    }

    /// `{I/2, I/2}`, carries no information.
    pub fn trivial() -> Self {
        let h = linalg::identity() * c64(0.5, 0.0);
        Self::new(vec![h, h]).expect("valid")
    }

    /// Symmetric informationally complete POVM (regular tetrahedron).
    pub fn tetrahedral() -> Self {
        let s = 1.0 / 3f64.sqrt();
        let dirs = [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]];
        let parts: Vec<_> = dirs.iter().map(|&n| (0.5, n)).collect();
        Self::from_bloch(&parts).expect("valid")
    }

    /// Each Pauli basis measured with probability 1/3 (six outcomes).
    pub fn pauli() -> Self {
        let w = 1.0 / 3.0;
        let mut parts = Vec::new();
        for axis in 0..3 {
            let mut n = [0.0; 3];
            n[axis] = 1.0;
            parts.push((w, n));
            parts.push((w, n.map(|v| -v)));
        }
        Self::from_bloch(&parts).expect("valid")
    }

    pub fn elements(&self) -> &[CMat2] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn from_spec(spec: &PovmSpec) -> Result<Self> {
        let elements = spec
            .elements
            .iter()
            .enumerate()
            .map(|(k, e)| match e {
                ElementSpec::Bloch { weight, direction } => bloch_element(k, *weight, *direction),
                ElementSpec::Matrix { matrix } => Ok(CMat2::new(
                    c64(matrix[0], matrix[1]),
                    c64(matrix[2], matrix[3]),
                    c64(matrix[4], matrix[5]),
                    c64(matrix[6], matrix[7]),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(elements)
    }

    /// Parses `{"elements": [...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: PovmSpec = serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("malformed POVM document: {e}")))?;
        Self::from_spec(&spec)
    }

    /// Explicit-matrix form of this POVM.
    pub fn to_spec(&self) -> PovmSpec {
        PovmSpec {
            elements: self
                .elements
                .iter()
                .map(|m| ElementSpec::Matrix {
                    matrix: [
                        m[(0, 0)].re,
                        m[(0, 0)].im,
                        m[(0, 1)].re,
                        m[(0, 1)].im,
                        m[(1, 0)].re,
                        m[(1, 0)].im,
                        m[(1, 1)].re,
                        m[(1, 1)].im,
                    ],
                })
                .collect(),
        }
    }
}

fn bloch_element(index: usize, weight: f64, n: [f64; 3]) -> Result<CMat2> {
    if !(weight > 0.0 && weight <= 1.0) {
        return Err(Error::InvalidPovmElement {
            index,
            reason: format!("weight {weight} outside (0, 1]"),
        });
    }
    let norm = n.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !((norm - 1.0).abs() <= 1e-9) {
        return Err(Error::InvalidPovmElement {
            index,
            reason: format!("direction has norm {norm}, expected 1"),
        });
    }
    Ok((linalg::identity() + linalg::pauli_dot(n)) * c64(0.5 * weight, 0.0))
}

/// On-disk POVM description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmSpec {
    pub elements: Vec<ElementSpec>,
}

/// Either `{"weight": w, "direction": [nx, ny, nz]}` meaning
/// `w (I + n . sigma) / 2`, or `{"matrix": [re, im, ...]}` with the four
/// entries in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum ElementSpec {
    Bloch { weight: f64, direction: [f64; 3] },
    Matrix { matrix: [f64; 8] },
}

/// `p_k = <psi|Pi_k|psi>`, with round-off negatives clamped to zero.
pub fn outcome_probabilities(psi: &StateVector, povm: &Povm) -> Vec<f64> {
    let v = psi.as_vector();
    povm.elements
        .iter()
        .map(|e| v.dotc(&(e * v)).re.max(0.0))
        .collect()
}

/// Random rank-one POVM, used by tests and benchmarks: `k` random vectors
/// made complete by `S^{-1/2}`.
pub fn random_povm<R: rand::Rng + ?Sized>(rng: &mut R, k: usize) -> Povm {
    loop {
        let vecs: Vec<_> = (0..k)
            .map(|_| {
                let a: f64 = rng.random_range(0.0..PI);
                let b: f64 = rng.random_range(0.0..2.0 * PI);
                let w: f64 = rng.random_range(0.2..1.0);
                crate::linalg::CVec2::new(
                    c64(w * (a / 2.0).cos(), 0.0),
                    num_complex::Complex64::from_polar(w * (a / 2.0).sin(), b),
                )
            })
            .collect();
        if let Some(p) = super::nagaoka::complete_rank_one(&vecs) {
            return p;
        }
    }
}
