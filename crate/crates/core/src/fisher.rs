//! Quantum Fisher information, mean Uhlmann curvature and model diagnostics.
//!
//! Two independent routes are provided: overlap formulas evaluated on the
//! encoded state and its derivatives, and closed forms in terms of the
//! trigonometric combinations `X`, `Y`, `Z` of the scrambler angles.

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, c64};
use crate::state::{self, EncodingConfig, HermitianOp, StateVector, Tangent};

/// `det Q` at or below this is treated as singular (sloppy model).
pub const SINGULAR_DET: f64 = 1e-12;
/// `|D12|` at or below this makes the compatibility infinite.
pub const COMPATIBLE_D12: f64 = 1e-6;
/// Tolerated deviation from unit norm for input states.
pub const STATE_NORM_TOL: f64 = 1e-9;

/// A real number that may be `+inf`; serialized as `null` when infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtReal::Infinite)
    }

    /// IEEE view (`f64::INFINITY` for the infinite case).
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl std::fmt::Display for ExtReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtReal::Finite(v) => v.fmt(f),
            ExtReal::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::Infinite => s.serialize_none(),
        }
    }
}

/// SLD quantum Fisher information matrix (real symmetric 2x2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QfimMatrix {
    pub q11: f64,
    pub q12: f64,
    pub q22: f64,
}

impl QfimMatrix {
    pub fn new(q11: f64, q12: f64, q22: f64) -> Self {
        Self { q11, q12, q22 }
    }

    pub fn diagonal(q11: f64, q22: f64) -> Self {
        Self::new(q11, 0.0, q22)
    }

    pub fn det(&self) -> f64 {
        self.q11 * self.q22 - self.q12 * self.q12
    }

    pub fn trace(&self) -> f64 {
        self.q11 + self.q22
    }

    pub fn is_singular(&self) -> bool {
        self.det() <= SINGULAR_DET
    }

    pub fn as_array(&self) -> [[f64; 2]; 2] {
        [[self.q11, self.q12], [self.q12, self.q22]]
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        linalg::sym_eigen(self.as_array()).0
    }

    /// `Q^{-1}`, or `None` when singular.
    pub fn inverse(&self) -> Option<[[f64; 2]; 2]> {
        let det = self.det();
        if det <= SINGULAR_DET {
            return None;
        }
        Some([
            [self.q22 / det, -self.q12 / det],
            [-self.q12 / det, self.q11 / det],
        ])
    }
}

/// Mean Uhlmann curvature; only `D12 = -D21` is nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MucMatrix {
    pub d12: f64,
}

impl MucMatrix {
    pub fn det(&self) -> f64 {
        self.d12 * self.d12
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XyzfValues {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub f: f64,
}

/// Sloppiness, compatibility and quantumness of one model point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelScalars {
    pub det_q: f64,
    pub det_d: f64,
    /// `1/det Q`; infinite when `det Q <= SINGULAR_DET`.
    pub s: ExtReal,
    /// `2/Tr[D^dag D] = 1/D12^2`; infinite when `|D12| <= COMPATIBLE_D12`.
    pub c: ExtReal,
    /// `sqrt(det D / det Q)` as computed; `None` when `Q` is singular.
    pub r_raw: Option<f64>,
    /// `r_raw` clipped into `[0, 1]`.
    pub r: Option<f64>,
}

impl ModelScalars {
    pub fn is_sloppy(&self) -> bool {
        self.s.is_infinite()
    }
}

fn check_state(psi: &StateVector) -> Result<()> {
    let dev = psi.norm_deviation();
    if dev > STATE_NORM_TOL || !dev.is_finite() {
        return Err(Error::NotNormalized(dev));
    }
    Ok(())
}

/// `<d_mu psi|d_nu psi> - <d_mu psi|psi><psi|d_nu psi>`
fn projected_overlap(psi: &StateVector, a: &Tangent, b: &Tangent) -> Complex64 {
    let ab = a.as_vector().dotc(b.as_vector());
    let a_psi = a.as_vector().dotc(psi.as_vector());
    let psi_b = psi.inner(b.as_vector());
    ab - a_psi * psi_b
}

/// Pure-state QFIM `Q_mn = 4 Re(<d_m psi|d_n psi> - <d_m psi|psi><psi|d_n psi>)`.
pub fn qfim_from_states(psi: &StateVector, d1: &Tangent, d2: &Tangent) -> Result<QfimMatrix> {
    check_state(psi)?;
    Ok(QfimMatrix {
        q11: 4.0 * projected_overlap(psi, d1, d1).re,
        q12: 4.0 * projected_overlap(psi, d1, d2).re,
        q22: 4.0 * projected_overlap(psi, d2, d2).re,
    })
}

/// Pure-state `D12 = 4 Im(<d_1 psi|d_2 psi> - <d_1 psi|psi><psi|d_2 psi>)`.
pub fn muc_from_states(psi: &StateVector, d1: &Tangent, d2: &Tangent) -> Result<MucMatrix> {
    check_state(psi)?;
    Ok(MucMatrix {
        d12: 4.0 * projected_overlap(psi, d1, d2).im,
    })
}

/// Overlap-route `(Q, D)` at a configuration.
pub fn qfim_and_muc(cfg: &EncodingConfig) -> Result<(QfimMatrix, MucMatrix)> {
    let enc = state::encode_derivatives(cfg)?;
    let [d1, d2] = &enc.dpsi;
    Ok((
        qfim_from_states(&enc.psi, d1, d2)?,
        muc_from_states(&enc.psi, d1, d2)?,
    ))
}

/// Pure-state SLDs `L_mu = 2(|d_mu psi><psi| + |psi><d_mu psi|)`.
pub fn sld_operators(
    psi: &StateVector,
    d1: &Tangent,
    d2: &Tangent,
) -> Result<(HermitianOp, HermitianOp)> {
    check_state(psi)?;
    let sld = |d: &Tangent| {
        let a = linalg::outer(d.as_vector(), psi.as_vector());
        HermitianOp::new((a + a.adjoint()) * c64(2.0, 0.0))
    };
    Ok((sld(d1)?, sld(d2)?))
}

/// `Tr[rho L1 L2] = Q12 + i D12`.
pub fn sld_correlation(psi: &StateVector, l1: &HermitianOp, l2: &HermitianOp) -> Complex64 {
    let v = l1.matrix() * (l2.matrix() * psi.as_vector());
    psi.inner(&v)
}

/// `rho [L1, L2]`.
pub fn sld_commutator_term(
    psi: &StateVector,
    l1: &HermitianOp,
    l2: &HermitianOp,
) -> linalg::CMat2 {
    let (a, b) = (l1.matrix(), l2.matrix());
    psi.projector() * (a * b - b * a)
}

/// Closed-form `X`, `Y`, `Z` and the effective phase `f`.
pub fn closed_form_xyzf(cfg: &EncodingConfig) -> XyzfValues {
    let f = cfg.f();
    let (x, y, z) = xyz(cfg.gamma, cfg.theta, f);
    XyzfValues { x, y, z, f }
}

pub(crate) fn xyz(gamma: f64, theta: f64, f: f64) -> (f64, f64, f64) {
    let (sg, cg) = gamma.sin_cos();
    let (st, ct) = theta.sin_cos();
    let (sf, cf) = f.sin_cos();
    let x = cg * cg + sg * sg * (2.0 * theta).cos();
    let y = sg * st * (sf * cg + sg * ct * cf);
    let z = sg * st * (cf * cg - sg * ct * sf);
    (x, y, z)
}

/// Closed-form `Q` and `D`:
/// `Q11 = 4 sin^2 a`, `Q12 = 4(X sin^2 a - Y sin 2a)`,
/// `Q22 = 4[1 - (X cos a + 2Y sin a)^2]`, `D12 = -8 Z sin a`.
pub fn qfim_closed_form(cfg: &EncodingConfig) -> (QfimMatrix, MucMatrix) {
    let XyzfValues { x, y, z, .. } = closed_form_xyzf(cfg);
    let (sa, ca) = cfg.alpha.sin_cos();
    let m = x * ca + 2.0 * y * sa;
    (
        QfimMatrix {
            q11: 4.0 * sa * sa,
            q12: 4.0 * (x * sa * sa - y * (2.0 * cfg.alpha).sin()),
            q22: 4.0 * (1.0 - m * m),
        },
        MucMatrix { d12: -8.0 * z * sa },
    )
}

/// Sloppiness, compatibility and quantumness. Degenerate values are flagged,
/// never reported as errors.
pub fn model_scalars(q: &QfimMatrix, d: &MucMatrix) -> ModelScalars {
    let det_q = q.det();
    let det_d = d.det();
    let s = if det_q > SINGULAR_DET {
        ExtReal::Finite(1.0 / det_q)
    } else {
        ExtReal::Infinite
    };
    let c = if d.d12.abs() > COMPATIBLE_D12 {
        // 2 / Tr[D^T D] with Tr[D^T D] = 2 D12^2
        ExtReal::Finite(2.0 / (2.0 * d.d12 * d.d12))
    } else {
        ExtReal::Infinite
    };
    let r_raw = (det_q > SINGULAR_DET).then(|| (det_d / det_q).sqrt());
    ModelScalars {
        det_q,
        det_d,
        s,
        c,
        r_raw,
        r: r_raw.map(|r| r.clamp(0.0, 1.0)),
    }
}

/// Weak compatibility `Tr[rho [L1, L2]] = 0`, i.e. `|D12| <= tol`.
pub fn weak_compatibility(d: &MucMatrix, tol: f64) -> bool {
    d.d12.abs() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::random_config;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn cfg_with_f(alpha: f64, gamma: f64, theta: f64, f: f64) -> EncodingConfig {
        EncodingConfig::from_effective_phase(alpha, 0.0, gamma, theta, f, 0.3, -0.2).unwrap()
    }

    fn overlap_route(cfg: &EncodingConfig) -> (QfimMatrix, MucMatrix) {
        qfim_and_muc(cfg).unwrap()
    }

    #[test]
    fn optimum_has_isotropic_qfim() {
        let (q, d) = overlap_route(&EncodingConfig::optimal());
        assert!((q.q11 - 4.0).abs() < 1e-12);
        assert!(q.q12.abs() < 1e-12);
        assert!((q.q22 - 4.0).abs() < 1e-12);
        assert!((d.d12 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn no_scrambling_is_singular() {
        let (q, d) = overlap_route(&cfg_with_f(FRAC_PI_2, 0.0, 0.8, 1.1));
        for v in [q.q11, q.q12, q.q22] {
            assert!((v - 4.0).abs() < 1e-12);
        }
        assert!(q.det().abs() < 1e-12);
        assert!(d.d12.abs() < 1e-12);
    }

    #[test]
    fn pole_probe_has_no_first_parameter_information() {
        let (q, _) = overlap_route(&cfg_with_f(0.0, 0.9, 0.8, 1.1));
        assert!(q.q11.abs() < 1e-14);
    }

    #[test]
    fn axis_along_z_is_compatible() {
        for g in [0.3, 1.0, 2.5] {
            let (_, d) = overlap_route(&cfg_with_f(1.1, g, 0.0, 0.7));
            assert!(d.d12.abs() < 1e-12);
        }
    }

    #[test]
    fn not_normalized_rejected() {
        let enc = state::encode_derivatives(&EncodingConfig::optimal()).unwrap();
        let bad = StateVector::from_raw(enc.psi.as_vector() * c64(1.001, 0.0));
        let [d1, d2] = &enc.dpsi;
        assert!(matches!(qfim_from_states(&bad, d1, d2), Err(Error::NotNormalized(_))));
        assert!(matches!(muc_from_states(&bad, d1, d2), Err(Error::NotNormalized(_))));
        assert!(matches!(sld_operators(&bad, d1, d2), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn xyzf_special_values() {
        let v = closed_form_xyzf(&cfg_with_f(1.0, FRAC_PI_2, FRAC_PI_4, FRAC_PI_2));
        assert!(v.x.abs() < 1e-15 && v.y.abs() < 1e-15 && (v.z + 0.5).abs() < 1e-15);
        assert!((v.f - FRAC_PI_2).abs() < 1e-15);
        let v = closed_form_xyzf(&cfg_with_f(1.0, FRAC_PI_4, FRAC_PI_2, 0.0));
        assert!(v.x.abs() < 1e-15 && v.y.abs() < 1e-15 && (v.z - 0.5).abs() < 1e-15);
        let v = closed_form_xyzf(&cfg_with_f(1.0, 0.0, 1.3, 2.2));
        assert_eq!((v.x, v.y, v.z), (1.0, 0.0, 0.0));
    }

    #[test]
    fn xyz_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..1000 {
            let cfg = random_config(&mut rng);
            let v = closed_form_xyzf(&cfg);
            let b = cfg.gamma.sin() * cfg.theta.sin();
            assert!((v.x - (1.0 - 2.0 * b * b)).abs() < 1e-12);
            assert!((v.y * v.y + v.z * v.z - b * b * (1.0 - b * b)).abs() < 1e-12);
        }
    }

    #[test]
    fn diag_4_2_configuration() {
        let (q, d) = qfim_closed_form(&cfg_with_f(FRAC_PI_2, FRAC_PI_4, FRAC_PI_2, FRAC_PI_4));
        assert!((q.q11 - 4.0).abs() < 1e-12);
        assert!(q.q12.abs() < 1e-12);
        assert!((q.q22 - 2.0).abs() < 1e-12);
        assert!((d.det() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn routes_agree_and_determinant_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..1000 {
            let cfg = random_config(&mut rng);
            let (qo, dox) = overlap_route(&cfg);
            let (qc, dc) = qfim_closed_form(&cfg);
            assert!((qo.q11 - qc.q11).abs() < 1e-10);
            assert!((qo.q12 - qc.q12).abs() < 1e-10);
            assert!((qo.q22 - qc.q22).abs() < 1e-10);
            assert!((dox.d12 - dc.d12).abs() < 1e-10);
            let z = closed_form_xyzf(&cfg).z;
            let target = 64.0 * z * z * cfg.alpha.sin().powi(2);
            assert!((qo.det() - target).abs() < 1e-10);
            assert!((dox.det() - target).abs() < 1e-10);
            assert!(qo.eigenvalues()[0] >= -1e-10);
            assert!((qo.q11 - 4.0 * cfg.alpha.sin().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn sld_traces_reproduce_q_and_d() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..1000 {
            let cfg = random_config(&mut rng);
            let enc = state::encode_derivatives(&cfg).unwrap();
            let [d1, d2] = &enc.dpsi;
            let (l1, l2) = sld_operators(&enc.psi, d1, d2).unwrap();
            let q = qfim_from_states(&enc.psi, d1, d2).unwrap();
            let d = muc_from_states(&enc.psi, d1, d2).unwrap();
            let t = sld_correlation(&enc.psi, &l1, &l2);
            assert!((t.re - q.q12).abs() < 1e-10);
            assert!((t.im - d.d12).abs() < 1e-10);
            assert!((sld_correlation(&enc.psi, &l1, &l1).re - q.q11).abs() < 1e-10);
            assert!((sld_correlation(&enc.psi, &l2, &l2).re - q.q22).abs() < 1e-10);
        }
    }

    #[test]
    fn sld_solves_defining_equation() {
        let cfg = EncodingConfig::new(1.0, 0.3, 0.7, 1.1, 0.4, 0.2, 0.5).unwrap();
        let enc = state::encode_derivatives(&cfg).unwrap();
        let [d1, d2] = &enc.dpsi;
        let (l1, _) = sld_operators(&enc.psi, d1, d2).unwrap();
        let rho = enc.psi.projector();
        let drho = linalg::outer(d1.as_vector(), enc.psi.as_vector())
            + linalg::outer(enc.psi.as_vector(), d1.as_vector());
        let rhs = (l1.matrix() * rho + rho * l1.matrix()) * c64(0.5, 0.0);
        assert!(linalg::max_abs(&(rhs - drho)) < 1e-12);
    }

    #[test]
    fn weakly_compatible_without_scrambling() {
        let cfg = cfg_with_f(1.2, 0.0, 0.5, 0.5);
        let enc = state::encode_derivatives(&cfg).unwrap();
        let [d1, d2] = &enc.dpsi;
        let (l1, l2) = sld_operators(&enc.psi, d1, d2).unwrap();
        let tr = sld_commutator_term(&enc.psi, &l1, &l2).trace();
        assert!(tr.norm() < 1e-12);
        let (_, d) = overlap_route(&cfg);
        assert!(weak_compatibility(&d, 1e-9));
    }

    #[test]
    fn weak_compatibility_cases() {
        let (_, d) = overlap_route(&EncodingConfig::optimal());
        assert!(!weak_compatibility(&d, 1e-9));
        // cos f cos g = sin g cos t sin f
        for (g, t) in [(0.4, 0.9), (1.2, 2.0), (2.7, 0.3)] {
            let f = f64::atan2(f64::cos(g), f64::sin(g) * f64::cos(t));
            let (_, d) = overlap_route(&cfg_with_f(1.0, g, t, f));
            assert!(weak_compatibility(&d, 1e-9), "{g} {t}");
        }
    }

    #[test]
    fn scalars_at_optimum() {
        let (q, d) = overlap_route(&EncodingConfig::optimal());
        let m = model_scalars(&q, &d);
        assert!((m.s.finite().unwrap() - 1.0 / 16.0).abs() < 1e-14);
        assert!((m.c.finite().unwrap() - 1.0 / 16.0).abs() < 1e-14);
        assert!((m.r.unwrap() - 1.0).abs() < 1e-12);
        assert!(!m.is_sloppy());
    }

    #[test]
    fn scalars_without_scrambling_are_flagged() {
        let (q, d) = overlap_route(&cfg_with_f(1.0, 0.0, 0.5, 0.5));
        let m = model_scalars(&q, &d);
        assert!(m.s.is_infinite() && m.c.is_infinite());
        assert!(m.r.is_none() && m.r_raw.is_none());
        assert_eq!(serde_json::to_value(m.s).unwrap(), serde_json::Value::Null);
    }

    #[test]
    fn sloppiness_equals_compatibility() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let mut checked = 0;
        for _ in 0..2000 {
            let cfg = random_config(&mut rng);
            let (q, d) = overlap_route(&cfg);
            if q.det() < 1e-4 {
                continue;
            }
            checked += 1;
            let m = model_scalars(&q, &d);
            let (s, c) = (m.s.finite().unwrap(), m.c.finite().unwrap());
            assert!((s - c).abs() / s <= 1e-10, "{cfg:?}");
            assert!((m.r_raw.unwrap() - 1.0).abs() <= 1e-10);
            assert!((0.0..=1.0).contains(&m.r.unwrap()));
        }
        assert!(checked > 1900);
    }
}
