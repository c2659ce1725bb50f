//! Single-copy measurements that attain (or numerically approach) the
//! Nagaoka bound `min_POVM Tr[W F^{-1}]`.

use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

use super::fim::classical_fim_from_state;
use super::povm::Povm;
use crate::bounds::{self, WeightMatrix};
use crate::error::{Error, Result};
use crate::fisher::{self, SINGULAR_DET};
use crate::linalg::{self, c64, CVec2};
use crate::rng::{self, Purpose};
use crate::simplex::{self, SimplexOptions};
use crate::state::{encode_derivatives, EncodedState, EncodingConfig};
use num_complex::Complex64;

/// Objective value assigned to POVMs with a singular Fisher matrix.
pub const SINGULAR_PENALTY: f64 = 1e12;

/// Orthonormal frame of the Bloch sphere's tangent plane at the encoded
/// state, with the Bloch-vector derivatives expressed in it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentFrame {
    pub r: [f64; 3],
    pub e1: [f64; 3],
    pub e2: [f64; 3],
    /// `a[i][mu] = e_i . dr/dlambda_mu`; `Q = a^T a`.
    pub a: [[f64; 2]; 2],
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = dot(&v, &v).sqrt();
    v.map(|x| x / n)
}

impl TangentFrame {
    pub fn at(es: &EncodedState) -> Self {
        let r = es.psi.bloch();
        let d = [
            es.dpsi[0].bloch_derivative(&es.psi),
            es.dpsi[1].bloch_derivative(&es.psi),
        ];
        let seed = if dot(&d[0], &d[0]) > 1e-18 {
            d[0]
        } else if dot(&d[1], &d[1]) > 1e-18 {
            d[1]
        } else {
            // any direction orthogonal to r
            let t = if r[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
            cross(&r, &t)
        };
        let e1 = unit(seed);
        let e2 = unit(cross(&r, &e1));
        let a = [
            [dot(&e1, &d[0]), dot(&e1, &d[1])],
            [dot(&e2, &d[0]), dot(&e2, &d[1])],
        ];
        Self { r, e1, e2, a }
    }

    /// Tangent-plane coordinates to a Bloch direction.
    pub fn direction(&self, v: [f64; 2]) -> [f64; 3] {
        unit(std::array::from_fn(|i| v[0] * self.e1[i] + v[1] * self.e2[i]))
    }
}

fn inverse2(a: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ])
}

fn mul2(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
}

fn transpose2(a: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

/// POVM attaining `Tr[W F^{-1}] = C_N` at `cfg`.
///
/// Projective measurements along tangent directions `n_j` mixed with weights
/// `m_j` give `F = A^T M A` with `M = sum m_j n_j n_j^T`; the optimum is
/// `M = sqrt(G) / Tr sqrt(G)` with `G = A^{-T} W A^{-1}`.
pub fn optimal_povm(cfg: &EncodingConfig, w: &WeightMatrix) -> Result<Povm> {
    let es = encode_derivatives(cfg)?;
    let (q, _) = fisher::qfim_and_muc(cfg)?;
    if q.det() <= SINGULAR_DET {
        return Err(Error::SingularModel { det_q: q.det() });
    }
    let frame = TangentFrame::at(&es);
    let a_inv = inverse2(frame.a).ok_or(Error::SingularModel { det_q: q.det() })?;
    let wm = [[w.w11(), w.w12()], [w.w12(), w.w22()]];
    let mut g = mul2(transpose2(a_inv), mul2(wm, a_inv));
    let sym = 0.5 * (g[0][1] + g[1][0]);
    g[0][1] = sym;
    g[1][0] = sym;
    let root = linalg::sym_sqrt(g).ok_or(Error::SingularModel { det_q: q.det() })?;
    let tr = root[0][0] + root[1][1];
    let m = root.map(|row| row.map(|v| v / tr));
    let (vals, vecs) = linalg::sym_eigen(m);
    let total: f64 = vals.iter().map(|v| v.max(0.0)).sum();
    let mut parts = Vec::with_capacity(4);
    for j in 0..2 {
        let mj = vals[j].max(0.0) / total;
        if mj < 1e-14 {
            continue;
        }
        let n = frame.direction(vecs[j]);
        parts.push((mj.min(1.0), n));
        parts.push((mj.min(1.0), n.map(|v| -v)));
    }
    Povm::from_bloch(&parts)
}

/// Rank-one POVM `S^{-1/2}|v_k><v_k|S^{-1/2}` with `S = sum |v_k><v_k|`;
/// `None` if `S` is not invertible or the result fails validation.
pub fn complete_rank_one(vecs: &[CVec2]) -> Option<Povm> {
    let s = vecs
        .iter()
        .fold(crate::linalg::CMat2::zeros(), |acc, v| acc + linalg::outer(v, v));
    let k = linalg::hermitian_inv_sqrt(&s)?;
    let elements = vecs
        .iter()
        .map(|v| {
            let u = k * v;
            linalg::outer(&u, &u)
        })
        .collect();
    Povm::new(elements).ok()
}

fn povm_from_params(x: &[f64]) -> Option<Povm> {
    let k = x.len() / 3;
    let vecs: Vec<CVec2> = (0..k)
        .map(|i| {
            let scale = (0.5 * x[i].clamp(-30.0, 30.0)).exp();
            let (a, b) = (x[k + i], x[2 * k + i]);
            CVec2::new(
                c64(scale * (a / 2.0).cos(), 0.0),
                Complex64::from_polar(scale * (a / 2.0).sin(), b),
            )
        })
        .collect();
    complete_rank_one(&vecs)
}

fn objective(es: &EncodedState, w: &WeightMatrix, x: &[f64]) -> f64 {
    let Some(povm) = povm_from_params(x) else {
        return SINGULAR_PENALTY;
    };
    match classical_fim_from_state(es, &povm) {
        Ok(f) if f.det() > SINGULAR_DET => f.weighted_inverse_trace(w).unwrap_or(SINGULAR_PENALTY),
        _ => SINGULAR_PENALTY,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NagaokaSearch {
    pub value: f64,
    pub povm: Povm,
    pub best_start: usize,
    /// Closed-form `C_N` for comparison.
    pub closed_form: f64,
}

/// Minimizes `Tr[W F^{-1}]` over rank-one POVMs with 2, 3 or 4 outcomes
/// (start `i` uses `2 + i mod 3`), each start a restarted simplex search.
pub fn nagaoka_numeric(
    cfg: &EncodingConfig,
    w: &WeightMatrix,
    n_starts: usize,
    seed: u64,
) -> Result<NagaokaSearch> {
    let (q, _) = fisher::qfim_and_muc(cfg)?;
    if q.det() <= SINGULAR_DET {
        return Err(Error::SingularModel { det_q: q.det() });
    }
    let closed_form = bounds::holevo_nagaoka_bound(&q, w)?;
    let es = encode_derivatives(cfg)?;
    let opts = SimplexOptions {
        step: 0.3,
        f_tol: 1e-13,
        x_tol: 1e-9,
        max_evals: 6_000,
    };

    let results: Vec<(f64, Vec<f64>)> = (0..n_starts.max(1))
        .into_par_iter()
        .map(|i| {
            let k = 2 + i % 3;
            let mut rng = rng::stream(seed, Purpose::PovmSearchStart, i as u64);
            let mut x = Vec::with_capacity(3 * k);
            x.extend((0..k).map(|_| rng.random_range(-1.0..1.0)));
            x.extend((0..k).map(|_| rng.random_range(0.0..PI)));
            x.extend((0..k).map(|_| rng.random_range(0.0..2.0 * PI)));
            let mut best = (objective(&es, w, &x), x);
            for _ in 0..3 {
                let r = simplex::minimize(|y| objective(&es, w, y), &best.1, &opts);
                if r.value < best.0 {
                    best = (r.value, r.x);
                } else {
                    break;
                }
            }
            best
        })
        .collect();

    let mut best_start = 0;
    for (i, r) in results.iter().enumerate() {
        if r.0 < results[best_start].0 {
            best_start = i;
        }
    }
    let (value, x) = &results[best_start];
    if *value >= SINGULAR_PENALTY {
        return Err(Error::SearchFailed);
    }
    let povm = povm_from_params(x).ok_or(Error::SearchFailed)?;
    Ok(NagaokaSearch {
        value: *value,
        povm,
        best_start,
        closed_form,
    })
}
