//! Probe preparation, parameter encoding and derivative states.
//!
//! The encoded state is `U2 V U1 |psi0>` with `Uk = exp(-i sigma_z lambda_k)`
//! and `V = exp(-i gamma n.sigma)`. Derivative vectors are tangent vectors and
//! are never normalized; they live in [`Tangent`] rather than [`StateVector`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMat2, CVec2, I};

/// Tolerance for algebraic identities (unitarity, normalization, hermiticity).
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Default central finite-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// The seven real angles defining probe, scrambler and encoded parameters.
///
/// Angles are stored exactly as given. [`EncodingConfig::canonicalized`]
/// wraps them into `[-pi, pi)` for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncodingConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub theta: f64,
    pub phi: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl EncodingConfig {
    pub const FIELD_NAMES: [&'static str; 7] =
        ["alpha", "beta", "gamma", "theta", "phi", "lambda1", "lambda2"];

    pub fn new(
        alpha: f64,
        beta: f64,
        gamma: f64,
        theta: f64,
        phi: f64,
        lambda1: f64,
        lambda2: f64,
    ) -> Result<Self> {
        let cfg = Self {
            alpha,
            beta,
            gamma,
            theta,
            phi,
            lambda1,
            lambda2,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Minimal-sloppiness encoding: `alpha = pi/2`, `gamma = pi/2`,
    /// `theta = pi/4`, `f = pi/2` (with `beta = phi = lambda2 = 0`).
    pub fn optimal() -> Self {
        Self {
            alpha: PI / 2.0,
            beta: 0.0,
            gamma: PI / 2.0,
            theta: PI / 4.0,
            phi: 0.0,
            lambda1: PI / 4.0,
            lambda2: 0.0,
        }
    }

    /// Builds a config from the effective phase `f` instead of `phi`, using
    /// `phi = 2 lambda1 + beta - f`.
    pub fn from_effective_phase(
        alpha: f64,
        beta: f64,
        gamma: f64,
        theta: f64,
        f: f64,
        lambda1: f64,
        lambda2: f64,
    ) -> Result<Self> {
        Self::new(alpha, beta, gamma, theta, 2.0 * lambda1 + beta - f, lambda1, lambda2)
    }

    /// Effective phase `f = 2 lambda1 + beta - phi`.
    pub fn f(&self) -> f64 {
        2.0 * self.lambda1 + self.beta - self.phi
    }

    pub fn as_array(&self) -> [f64; 7] {
        [
            self.alpha,
            self.beta,
            self.gamma,
            self.theta,
            self.phi,
            self.lambda1,
            self.lambda2,
        ]
    }

    pub fn from_array(a: [f64; 7]) -> Self {
        Self {
            alpha: a[0],
            beta: a[1],
            gamma: a[2],
            theta: a[3],
            phi: a[4],
            lambda1: a[5],
            lambda2: a[6],
        }
    }

    pub fn with_lambdas(mut self, lambda1: f64, lambda2: f64) -> Self {
        self.lambda1 = lambda1;
        self.lambda2 = lambda2;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in Self::FIELD_NAMES.iter().zip(self.as_array()) {
            if !v.is_finite() {
                return Err(Error::NonFinite(name));
            }
        }
        Ok(())
    }

    /// Every angle wrapped into `[-pi, pi)`.
    pub fn canonicalized(&self) -> Self {
        Self::from_array(self.as_array().map(canonicalize_angle))
    }
}

impl Default for EncodingConfig {
    fn default() -> Self {
        Self::optimal()
    }
}

/// Maps an angle into `[-pi, pi)`.
pub fn canonicalize_angle(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let y = (x + PI).rem_euclid(two_pi) - PI;
    // rem_euclid can round up to exactly 2 pi
    if y >= PI {
        y - two_pi
    } else {
        y
    }
}

/// A normalized qubit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector(CVec2);

impl StateVector {
    /// Wraps `v`, rejecting vectors whose squared norm deviates from 1 by more
    /// than `tol`.
    pub fn new(v: CVec2, tol: f64) -> Result<Self> {
        let s = Self(v);
        let dev = s.norm_deviation();
        if dev > tol || !dev.is_finite() {
            return Err(Error::NotNormalized(dev));
        }
        Ok(s)
    }

    /// Normalizes `v` (which must be nonzero).
    pub fn normalized(v: CVec2) -> Result<Self> {
        let n = v.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::NotNormalized(f64::NAN));
        }
        Ok(Self(v / c64(n, 0.0)))
    }

    #[cfg(test)]
    pub(crate) fn from_raw(v: CVec2) -> Self {
        Self(v)
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        [self.0[0], self.0[1]]
    }

    pub fn as_vector(&self) -> &CVec2 {
        &self.0
    }

    /// `| <psi|psi> - 1 |`
    pub fn norm_deviation(&self) -> f64 {
        (self.0.norm_squared() - 1.0).abs()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &CVec2) -> Complex64 {
        self.0.dotc(other)
    }

    /// Rank-one projector `|psi><psi|`.
    pub fn projector(&self) -> CMat2 {
        linalg::outer(&self.0, &self.0)
    }

    /// Bloch vector `(<sx>, <sy>, <sz>)`.
    pub fn bloch(&self) -> [f64; 3] {
        let [a, b] = self.amplitudes();
        let ab = a.conj() * b;
        [2.0 * ab.re, 2.0 * ab.im, a.norm_sqr() - b.norm_sqr()]
    }
}

/// An unnormalized parameter derivative `|d psi / d lambda>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tangent(pub CVec2);

impl Tangent {
    pub fn as_vector(&self) -> &CVec2 {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Derivative of the Bloch vector along this tangent at `psi`:
    /// `dr_i = 2 Re <d psi|sigma_i|psi>`.
    pub fn bloch_derivative(&self, psi: &StateVector) -> [f64; 3] {
        let [a, b] = psi.amplitudes();
        let [da, db] = [self.0[0], self.0[1]];
        // <dpsi|sx|psi> = da* b + db* a, etc.
        let x = da.conj() * b + db.conj() * a;
        let y = -I * da.conj() * b + I * db.conj() * a;
        let z = da.conj() * a - db.conj() * b;
        [2.0 * x.re, 2.0 * y.re, 2.0 * z.re]
    }
}

/// A 2x2 unitary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryMatrix(CMat2);

impl UnitaryMatrix {
    pub fn new(m: CMat2) -> Result<Self> {
        let dev = linalg::max_abs(&(m.adjoint() * m - linalg::identity()));
        if dev > ALGEBRAIC_TOL || !dev.is_finite() {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &CMat2 {
        &self.0
    }

    pub fn apply(&self, v: &CVec2) -> CVec2 {
        self.0 * v
    }

    /// Largest entry of `U^dag U - I`.
    pub fn unitarity_defect(&self) -> f64 {
        linalg::max_abs(&(self.0.adjoint() * self.0 - linalg::identity()))
    }
}

/// A 2x2 Hermitian operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianOp(CMat2);

impl HermitianOp {
    pub fn new(m: CMat2) -> Result<Self> {
        let dev = linalg::max_abs(&(m - m.adjoint()));
        if dev > ALGEBRAIC_TOL || !dev.is_finite() {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self(m))
    }

    pub fn pauli_x() -> Self {
        Self(linalg::sigma_x())
    }

    pub fn pauli_y() -> Self {
        Self(linalg::sigma_y())
    }

    pub fn pauli_z() -> Self {
        Self(linalg::sigma_z())
    }

    pub fn matrix(&self) -> &CMat2 {
        &self.0
    }
}

fn check_finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(name))
    }
}

/// `exp(-i angle sigma_z) = diag(e^{-i angle}, e^{+i angle})`.
pub fn rotation_z(angle: f64) -> Result<UnitaryMatrix> {
    check_finite("angle", angle)?;
    let (s, c) = angle.sin_cos();
    Ok(UnitaryMatrix(CMat2::new(
        c64(c, -s),
        linalg::ZERO,
        linalg::ZERO,
        c64(c, s),
    )))
}

/// `exp(-i gamma n.sigma) = cos(gamma) I - i sin(gamma) n.sigma` with
/// `n = (cos phi sin theta, sin phi sin theta, cos theta)`.
pub fn rotation_axis(gamma: f64, theta: f64, phi: f64) -> Result<UnitaryMatrix> {
    check_finite("gamma", gamma)?;
    check_finite("theta", theta)?;
    check_finite("phi", phi)?;
    let (sg, cg) = gamma.sin_cos();
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    // -i sin(gamma) (n.sigma)
    let a = c64(cg, -sg * ct);
    let d = c64(cg, sg * ct);
    // off-diagonals of n.sigma: n_x -/+ i n_y = sin(theta) e^{-/+ i phi}
    let b = -I * c64(sg * st * cp, -sg * st * sp);
    let c = -I * c64(sg * st * cp, sg * st * sp);
    Ok(UnitaryMatrix(CMat2::new(a, b, c, d)))
}

/// `cos(alpha/2)|0> + e^{i beta} sin(alpha/2)|1>`.
pub fn prepare_probe(alpha: f64, beta: f64) -> Result<StateVector> {
    check_finite("alpha", alpha)?;
    check_finite("beta", beta)?;
    let (sa, ca) = (alpha / 2.0).sin_cos();
    let phase = Complex64::from_polar(1.0, beta);
    Ok(StateVector(CVec2::new(c64(ca, 0.0), phase * sa)))
}

/// The encoded state `U2 V U1 |psi0>`.
pub fn encode(cfg: &EncodingConfig) -> Result<StateVector> {
    Ok(encode_derivatives(cfg)?.psi)
}

/// Encoded state together with its analytic parameter derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodedState {
    pub psi: StateVector,
    pub dpsi: [Tangent; 2],
}

/// `d/d lambda1 psi = U2 V (-i sz) U1 psi0`, `d/d lambda2 psi = (-i sz) U2 V U1 psi0`.
pub fn encode_derivatives(cfg: &EncodingConfig) -> Result<EncodedState> {
    cfg.validate()?;
    let probe = prepare_probe(cfg.alpha, cfg.beta)?;
    let u1 = rotation_z(cfg.lambda1)?;
    let v = rotation_axis(cfg.gamma, cfg.theta, cfg.phi)?;
    let u2 = rotation_z(cfg.lambda2)?;
    let minus_i_sz = linalg::sigma_z() * (-I);

    let after_u1 = u1.apply(probe.as_vector());
    let psi = u2.apply(&v.apply(&after_u1));
    let d1 = u2.apply(&v.apply(&(minus_i_sz * after_u1)));
    let d2 = minus_i_sz * psi;
    Ok(EncodedState {
        psi: StateVector(psi),
        dpsi: [Tangent(d1), Tangent(d2)],
    })
}

/// Central finite differences `(psi(l + h) - psi(l - h)) / 2h` for both
/// parameters. `h` must lie in `(0, 1e-3]`.
pub fn finite_diff_derivatives(cfg: &EncodingConfig, h: f64) -> Result<[Tangent; 2]> {
    if !(h > 0.0 && h <= 1e-3) {
        return Err(Error::InvalidStep(h));
    }
    cfg.validate()?;
    let diff = |plus: EncodingConfig, minus: EncodingConfig| -> Result<Tangent> {
        let p = *encode(&plus)?.as_vector();
        let m = *encode(&minus)?.as_vector();
        Ok(Tangent((p - m) / c64(2.0 * h, 0.0)))
    };
    let d1 = diff(
        cfg.with_lambdas(cfg.lambda1 + h, cfg.lambda2),
        cfg.with_lambdas(cfg.lambda1 - h, cfg.lambda2),
    )?;
    let d2 = diff(
        cfg.with_lambdas(cfg.lambda1, cfg.lambda2 + h),
        cfg.with_lambdas(cfg.lambda1, cfg.lambda2 - h),
    )?;
    Ok([d1, d2])
}
