//! Scalar Cramér-Rao bound hierarchy for the two-parameter qubit model.
//!
//! All bounds are per shot (a single repetition); divide by the number of
//! repetitions to get variances.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fisher::{self, ExtReal, ModelScalars, QfimMatrix, SINGULAR_DET};
use crate::linalg;
use crate::state::{EncodingConfig, HermitianOp, StateVector};

/// Leading-minor slack used when validating weight matrices.
pub const WEIGHT_SLACK: f64 = 1e-12;

/// Symmetric positive definite weight matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightMatrix {
    w11: f64,
    w12: f64,
    w22: f64,
}

impl WeightMatrix {
    pub fn new(w11: f64, w12: f64, w22: f64) -> Result<Self> {
        let det = w11 * w22 - w12 * w12;
        let finite = w11.is_finite() && w12.is_finite() && w22.is_finite();
        if !finite || w11 <= WEIGHT_SLACK || det <= WEIGHT_SLACK {
            return Err(Error::InvalidWeight { w11, det });
        }
        Ok(Self { w11, w12, w22 })
    }

    pub fn identity() -> Self {
        Self {
            w11: 1.0,
            w12: 0.0,
            w22: 1.0,
        }
    }

    pub fn w11(&self) -> f64 {
        self.w11
    }

    pub fn w12(&self) -> f64 {
        self.w12
    }

    pub fn w22(&self) -> f64 {
        self.w22
    }

    pub fn det(&self) -> f64 {
        self.w11 * self.w22 - self.w12 * self.w12
    }

    /// `Tr[W A]` for symmetric `A`.
    pub fn trace_with(&self, a: [[f64; 2]; 2]) -> f64 {
        self.w11 * a[0][0] + 2.0 * self.w12 * a[0][1] + self.w22 * a[1][1]
    }
}

impl Default for WeightMatrix {
    fn default() -> Self {
        Self::identity()
    }
}

fn inverse_or_singular(q: &QfimMatrix) -> Result<[[f64; 2]; 2]> {
    q.inverse().ok_or(Error::SingularModel { det_q: q.det() })
}

/// SLD bound `C_S = Tr[W Q^{-1}]`.
pub fn sld_bound(q: &QfimMatrix, w: &WeightMatrix) -> Result<f64> {
    Ok(w.trace_with(inverse_or_singular(q)?))
}

/// Holevo bound, equal to the Nagaoka bound for a two-parameter pure qubit:
/// `Tr[W Q^{-1}] + 2 sqrt(det[W Q^{-1}])`.
pub fn holevo_nagaoka_bound(q: &QfimMatrix, w: &WeightMatrix) -> Result<f64> {
    let cs = sld_bound(q, w)?;
    Ok(cs + 2.0 * (w.det() / q.det()).sqrt())
}

/// Nagaoka bound from the SLD operators:
/// `C_S + sqrt(det W) / det Q * Tr|rho [L1, L2]|`.
pub fn nagaoka_via_slds(
    psi: &StateVector,
    l1: &HermitianOp,
    l2: &HermitianOp,
    q: &QfimMatrix,
    w: &WeightMatrix,
) -> Result<f64> {
    let cs = sld_bound(q, w)?;
    let term = fisher::sld_commutator_term(psi, l1, l2);
    Ok(cs + w.det().sqrt() / q.det() * linalg::trace_norm(&term))
}

/// Sequential-strategy bounds
/// `K1 = 2([Q^{-1}]_11 + 1/Q22)`, `K2 = 2([Q^{-1}]_22 + 1/Q11)`.
pub fn sequential_bounds(q: &QfimMatrix) -> Result<(f64, f64)> {
    let inv = inverse_or_singular(q)?;
    if q.q11 <= 0.0 || q.q22 <= 0.0 {
        return Err(Error::SingularModel { det_q: q.det() });
    }
    Ok((
        2.0 * (inv[0][0] + 1.0 / q.q22),
        2.0 * (inv[1][1] + 1.0 / q.q11),
    ))
}

/// Lower bound on `K_j` when a fraction `fraction` of the shots goes to the
/// first step: `2 sqrt(s) / sqrt(fraction (1 - fraction))`.
pub fn allocation_bound(s: f64, fraction: f64) -> Result<f64> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidAllocation(fraction));
    }
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sloppiness must be finite and positive, got {s}"
        )));
    }
    Ok(2.0 * s.sqrt() / (fraction * (1.0 - fraction)).sqrt())
}

/// Every bound and scalar at one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    pub config: EncodingConfig,
    pub weight: WeightMatrix,
    pub qfim: QfimMatrix,
    pub d12: f64,
    pub scalars: ModelScalars,
    pub c_s: ExtReal,
    pub c_h: ExtReal,
    pub c_n: ExtReal,
    pub c_r: ExtReal,
    pub k1: ExtReal,
    pub k2: ExtReal,
    /// `2 sqrt(det W s) <= C_S <= C_H = C_N <= 2 C_S` holds (slack 1e-10).
    /// `None` for a sloppy model.
    pub chain_holds: Option<bool>,
    /// `C_H <= min(K1, K2)` holds (slack 1e-10). `None` for a sloppy model.
    pub sequential_dominated: Option<bool>,
}

impl BoundsReport {
    pub fn is_sloppy(&self) -> bool {
        self.scalars.is_sloppy()
    }
}

const CHAIN_SLACK: f64 = 1e-10;

/// Assembles the bound hierarchy. A sloppy model gives a report with
/// infinite bounds rather than an error.
pub fn hierarchy_report(cfg: &EncodingConfig, w: &WeightMatrix) -> Result<BoundsReport> {
    let (q, d) = fisher::qfim_and_muc(cfg)?;
    let scalars = fisher::model_scalars(&q, &d);
    let mut report = BoundsReport {
        config: *cfg,
        weight: *w,
        qfim: q,
        d12: d.d12,
        scalars,
        c_s: ExtReal::Infinite,
        c_h: ExtReal::Infinite,
        c_n: ExtReal::Infinite,
        c_r: ExtReal::Infinite,
        k1: ExtReal::Infinite,
        k2: ExtReal::Infinite,
        chain_holds: None,
        sequential_dominated: None,
    };
    if q.det() <= SINGULAR_DET {
        return Ok(report);
    }
    let cs = sld_bound(&q, w)?;
    let ch = holevo_nagaoka_bound(&q, w)?;
    let (k1, k2) = sequential_bounds(&q)?;
    let floor = 2.0 * (w.det() / q.det()).sqrt();
    report.c_s = ExtReal::Finite(cs);
    report.c_h = ExtReal::Finite(ch);
    report.c_n = ExtReal::Finite(ch);
    report.c_r = ExtReal::Finite(ch);
    report.k1 = ExtReal::Finite(k1);
    report.k2 = ExtReal::Finite(k2);
    report.chain_holds = Some(
        floor <= cs + CHAIN_SLACK && cs <= ch + CHAIN_SLACK && ch <= 2.0 * cs + CHAIN_SLACK,
    );
    report.sequential_dominated = Some(ch <= k1.min(k2) + CHAIN_SLACK);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::random_config;
    use crate::state;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn diag_4_2_config() -> EncodingConfig {
        EncodingConfig::from_effective_phase(FRAC_PI_2, 0.0, FRAC_PI_4, FRAC_PI_2, FRAC_PI_4, 0.0, 0.0)
            .unwrap()
    }

    const DIAG_4_2_CH: f64 = 0.75 + 0.707_106_781_186_547_5;

    #[test]
    fn weight_validation() {
        assert!(WeightMatrix::new(1.0, 0.0, 1.0).is_ok());
        assert!(WeightMatrix::new(2.0, 0.5, 1.0).is_ok());
        assert!(matches!(WeightMatrix::new(0.0, 0.0, 1.0), Err(Error::InvalidWeight { .. })));
        assert!(matches!(WeightMatrix::new(1.0, 1.0, 1.0), Err(Error::InvalidWeight { .. })));
        assert!(matches!(WeightMatrix::new(-1.0, 0.0, -1.0), Err(Error::InvalidWeight { .. })));
        assert!(WeightMatrix::new(f64::NAN, 0.0, 1.0).is_err());
    }

    #[test]
    fn sld_bound_examples() {
        let w = WeightMatrix::identity();
        assert!((sld_bound(&QfimMatrix::diagonal(4.0, 4.0), &w).unwrap() - 0.5).abs() < 1e-15);
        assert!((sld_bound(&QfimMatrix::diagonal(8.0, 2.0), &w).unwrap() - 0.625).abs() < 1e-15);
        let (q, _) = fisher::qfim_and_muc(&diag_4_2_config()).unwrap();
        assert!((sld_bound(&q, &w).unwrap() - 0.75).abs() < 1e-12);
        assert!(matches!(
            sld_bound(&QfimMatrix::new(4.0, 4.0, 4.0), &w),
            Err(Error::SingularModel { .. })
        ));
    }

    #[test]
    fn holevo_examples() {
        let w = WeightMatrix::identity();
        assert!((holevo_nagaoka_bound(&QfimMatrix::diagonal(4.0, 4.0), &w).unwrap() - 1.0).abs() < 1e-15);
        let v = holevo_nagaoka_bound(&QfimMatrix::diagonal(4.0, 2.0), &w).unwrap();
        assert!((v - DIAG_4_2_CH).abs() < 1e-14);
        assert!((v - 1.4571).abs() < 1e-4);
        // isotropic Q saturates C_H = 2 C_S, anisotropic does not
        let iso = QfimMatrix::diagonal(3.0, 3.0);
        assert!((holevo_nagaoka_bound(&iso, &w).unwrap() - 2.0 * sld_bound(&iso, &w).unwrap()).abs() < 1e-14);
        let q = QfimMatrix::diagonal(4.0, 2.0);
        assert!(holevo_nagaoka_bound(&q, &w).unwrap() < 2.0 * sld_bound(&q, &w).unwrap() - 1e-3);
    }

    #[test]
    fn holevo_gap_with_general_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..500 {
            let cfg = random_config(&mut rng);
            let (q, _) = fisher::qfim_and_muc(&cfg).unwrap();
            if q.det() < 1e-4 {
                continue;
            }
            let (a, b): (f64, f64) = (rng.random_range(0.1..3.0), rng.random_range(0.1..3.0));
            let c = rng.random_range(-0.9..0.9) * (a * b).sqrt();
            let w = WeightMatrix::new(a, c, b).unwrap();
            let gap = holevo_nagaoka_bound(&q, &w).unwrap() - sld_bound(&q, &w).unwrap();
            assert!((gap - 2.0 * (w.det() / q.det()).sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn nagaoka_from_slds() {
        let w = WeightMatrix::identity();
        let enc = state::encode_derivatives(&EncodingConfig::optimal()).unwrap();
        let [d1, d2] = &enc.dpsi;
        let (l1, l2) = fisher::sld_operators(&enc.psi, d1, d2).unwrap();
        let q = fisher::qfim_from_states(&enc.psi, d1, d2).unwrap();
        let term = fisher::sld_commutator_term(&enc.psi, &l1, &l2);
        assert!((linalg::trace_norm(&term) - 8.0).abs() < 1e-12);
        assert!((nagaoka_via_slds(&enc.psi, &l1, &l2, &q, &w).unwrap() - 1.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let mut n = 0;
        while n < 1000 {
            let cfg = random_config(&mut rng);
            let enc = state::encode_derivatives(&cfg).unwrap();
            let [d1, d2] = &enc.dpsi;
            let q = fisher::qfim_from_states(&enc.psi, d1, d2).unwrap();
            if q.det() < 1e-4 {
                continue;
            }
            n += 1;
            let (l1, l2) = fisher::sld_operators(&enc.psi, d1, d2).unwrap();
            let a = nagaoka_via_slds(&enc.psi, &l1, &l2, &q, &w).unwrap();
            let b = holevo_nagaoka_bound(&q, &w).unwrap();
            assert!((a - b).abs() <= 1e-9 * b.max(1.0), "{a} {b}");
        }
    }

    #[test]
    fn nagaoka_from_slds_sloppy() {
        let mut cfg = EncodingConfig::optimal();
        cfg.gamma = 0.0;
        let enc = state::encode_derivatives(&cfg).unwrap();
        let [d1, d2] = &enc.dpsi;
        let (l1, l2) = fisher::sld_operators(&enc.psi, d1, d2).unwrap();
        let q = fisher::qfim_from_states(&enc.psi, d1, d2).unwrap();
        let term = fisher::sld_commutator_term(&enc.psi, &l1, &l2);
        assert!(linalg::trace_norm(&term) < 1e-12);
        assert!(matches!(
            nagaoka_via_slds(&enc.psi, &l1, &l2, &q, &WeightMatrix::identity()),
            Err(Error::SingularModel { .. })
        ));
    }

    #[test]
    fn sequential_examples() {
        let (k1, k2) = sequential_bounds(&QfimMatrix::diagonal(4.0, 4.0)).unwrap();
        assert!((k1 - 1.0).abs() < 1e-15 && (k2 - 1.0).abs() < 1e-15);
        let (k1, k2) = sequential_bounds(&QfimMatrix::diagonal(4.0, 2.0)).unwrap();
        assert!((k1 - 1.5).abs() < 1e-15 && (k2 - 1.5).abs() < 1e-15);
        assert!(k1 >= 4.0 * (1.0f64 / 8.0).sqrt());
        for q in [0.5, 1.0, 7.0] {
            let (k1, k2) = sequential_bounds(&QfimMatrix::diagonal(q, q)).unwrap();
            assert!((k1 - 4.0 / q).abs() < 1e-14 && (k2 - 4.0 / q).abs() < 1e-14);
        }
    }

    #[test]
    fn allocation_examples() {
        assert!((allocation_bound(1.0 / 16.0, 0.5).unwrap() - 1.0).abs() < 1e-15);
        let v = allocation_bound(1.0 / 16.0, 0.25).unwrap();
        assert!((v - 0.5 / (3.0f64 / 16.0).sqrt()).abs() < 1e-15);
        assert!((v - 1.1547).abs() < 1e-4);
        for g in [0.1, 0.3, 0.45] {
            let (a, b) = (allocation_bound(0.2, g).unwrap(), allocation_bound(0.2, 1.0 - g).unwrap());
            assert!((a - b).abs() < 1e-14 * a);
        }
        assert_eq!(allocation_bound(0.2, 0.0), Err(Error::InvalidAllocation(0.0)));
        assert_eq!(allocation_bound(0.2, 1.0), Err(Error::InvalidAllocation(1.0)));
    }

    #[test]
    fn allocation_minimized_at_half() {
        let grid: Vec<f64> = (1..=99).map(|k| k as f64 / 100.0).collect();
        let best = grid
            .iter()
            .copied()
            .min_by(|a, b| {
                allocation_bound(0.3, *a).unwrap().total_cmp(&allocation_bound(0.3, *b).unwrap())
            })
            .unwrap();
        assert_eq!(best, 0.5);
    }

    #[test]
    fn report_at_optimum() {
        let r = hierarchy_report(&EncodingConfig::optimal(), &WeightMatrix::identity()).unwrap();
        let vals = [r.c_s, r.c_h, r.c_n, r.c_r, r.k1, r.k2].map(|v| v.finite().unwrap());
        let expected = [0.5, 1.0, 1.0, 1.0, 1.0, 1.0];
        for (v, e) in vals.iter().zip(expected) {
            assert!((v - e).abs() < 1e-12);
        }
        assert_eq!(r.chain_holds, Some(true));
        assert_eq!(r.sequential_dominated, Some(true));
    }

    #[test]
    fn report_without_scrambling() {
        let mut cfg = EncodingConfig::optimal();
        cfg.gamma = 0.0;
        let r = hierarchy_report(&cfg, &WeightMatrix::identity()).unwrap();
        assert!(r.is_sloppy());
        for v in [r.c_s, r.c_h, r.c_n, r.c_r, r.k1, r.k2] {
            assert!(v.is_infinite());
        }
        assert_eq!(r.chain_holds, None);
    }

    #[test]
    fn report_at_diag_4_2() {
        let r = hierarchy_report(&diag_4_2_config(), &WeightMatrix::identity()).unwrap();
        let vals = [r.c_s, r.c_h, r.c_n, r.c_r, r.k1, r.k2].map(|v| v.finite().unwrap());
        let expected = [0.75, DIAG_4_2_CH, DIAG_4_2_CH, DIAG_4_2_CH, 1.5, 1.5];
        for (v, e) in vals.iter().zip(expected) {
            assert!((v - e).abs() < 1e-12, "{v} {e}");
        }
    }

    #[test]
    fn chain_and_sequential_hold_everywhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let w = WeightMatrix::identity();
        for _ in 0..2000 {
            let cfg = random_config(&mut rng);
            let r = hierarchy_report(&cfg, &w).unwrap();
            if r.is_sloppy() {
                continue;
            }
            assert_eq!(r.chain_holds, Some(true));
            if r.qfim.q12.abs() < 1e-12 {
                assert_eq!(r.sequential_dominated, Some(true));
            }
            let s = r.scalars.s.finite().unwrap();
            let (k1, k2) = (r.k1.finite().unwrap(), r.k2.finite().unwrap());
            assert!(k1 >= 4.0 * s.sqrt() - 1e-10 && k2 >= 4.0 * s.sqrt() - 1e-10);
        }
    }

    #[test]
    fn sequential_dominates_holevo_for_diagonal_qfim() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let w = WeightMatrix::identity();
        for _ in 0..1000 {
            let q = QfimMatrix::diagonal(rng.random_range(0.01..4.0), rng.random_range(0.01..4.0));
            let ch = holevo_nagaoka_bound(&q, &w).unwrap();
            let (k1, k2) = sequential_bounds(&q).unwrap();
            assert!(k1.min(k2) >= ch - 1e-10);
        }
        let q = QfimMatrix::diagonal(2.5, 2.5);
        let (k1, k2) = sequential_bounds(&q).unwrap();
        assert!((k1 - holevo_nagaoka_bound(&q, &w).unwrap()).abs() < 1e-12 && k1 == k2);
    }

    #[test]
    fn strongly_correlated_qfim_puts_sequential_below_holevo() {
        // K ignores the step-1 error carried into step 2
        let q = QfimMatrix::new(1.0, 0.9, 1.0);
        let ch = holevo_nagaoka_bound(&q, &WeightMatrix::identity()).unwrap();
        let (k1, _) = sequential_bounds(&q).unwrap();
        let expected_ch = 2.0 / 0.19 + 2.0 / 0.19f64.sqrt();
        assert!((ch - expected_ch).abs() < 1e-12);
        assert!((k1 - 2.0 * (1.0 / 0.19 + 1.0)).abs() < 1e-12);
        assert!(k1 < ch);
    }
}
