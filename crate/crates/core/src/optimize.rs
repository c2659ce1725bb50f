//! Landscape of `Z^2(gamma, theta, f)` and global maximization of `det Q`.
//!
//! `det Q = 64 Z^2 sin^2(alpha)`, so minimizing sloppiness amounts to
//! maximizing `Z^2` with `alpha = pi/2`. The maximum `Z^2 = 1/4` is reached on
//! the curve `sin^2(gamma) sin^2(theta) = 1/2` (with `f` tied to the other two
//! angles); the two textbook representatives are `(pi/2, pi/4, pi/2)` and
//! `(pi/4, pi/2, 0)`.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{self, WeightMatrix};
use crate::error::Result;
use crate::fisher::{self, xyz};
use crate::rng::{self, Purpose};
use crate::simplex::{self, SimplexOptions};
use crate::state::EncodingConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LandscapePoint {
    pub gamma: f64,
    pub theta: f64,
    pub f: f64,
    pub z_squared: f64,
    pub gradient: [f64; 3],
}

impl LandscapePoint {
    pub fn at(gamma: f64, theta: f64, f: f64) -> Self {
        Self {
            gamma,
            theta,
            f,
            z_squared: z_squared(gamma, theta, f),
            gradient: z_squared_gradient(gamma, theta, f),
        }
    }
}

/// `Z^2` with `Z = sin g sin t (cos f cos g - sin g cos t sin f)`.
pub fn z_squared(gamma: f64, theta: f64, f: f64) -> f64 {
    let (_, _, z) = xyz(gamma, theta, f);
    z * z
}

/// `cos f cos g - sin g cos t sin f`, the factor shared by every partial.
fn z_factor(gamma: f64, theta: f64, f: f64) -> f64 {
    f.cos() * gamma.cos() - gamma.sin() * theta.cos() * f.sin()
}

/// The three bracketed factors whose simultaneous vanishing defines the
/// maxima of `Z^2`:
///
/// 1. `cos f (cos^2 g - sin^2 g) - 2 sin g cos g cos t sin f`
/// 2. `sin g sin f (cos^2 t - sin^2 t) - cos f cos g cos t`
/// 3. `cos g sin f + sin g cos t cos f`
pub fn maximum_conditions(gamma: f64, theta: f64, f: f64) -> [f64; 3] {
    let (sg, cg) = gamma.sin_cos();
    let (st, ct) = theta.sin_cos();
    let (sf, cf) = f.sin_cos();
    [
        cf * (cg * cg - sg * sg) - 2.0 * sg * cg * ct * sf,
        sg * sf * (ct * ct - st * st) - cf * cg * ct,
        cg * sf + sg * ct * cf,
    ]
}

/// Analytic `(dZ^2/dgamma, dZ^2/dtheta, dZ^2/df)`.
pub fn z_squared_gradient(gamma: f64, theta: f64, f: f64) -> [f64; 3] {
    let (sg, _) = gamma.sin_cos();
    let st = theta.sin();
    let zf = z_factor(gamma, theta, f);
    let [c1, c2, c3] = maximum_conditions(gamma, theta, f);
    [
        2.0 * st * st * sg * zf * c1,
        // the second displayed bracket is the negative of condition 2
        2.0 * sg * sg * st * zf * (-c2),
        -2.0 * sg * sg * st * st * zf * c3,
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StationaryCase {
    Case1,
    Case2,
    Case3,
    Case4a,
    Case4b,
    NonStationary,
}

impl StationaryCase {
    pub fn label(&self) -> &'static str {
        match self {
            StationaryCase::Case1 => "case1",
            StationaryCase::Case2 => "case2",
            StationaryCase::Case3 => "case3",
            StationaryCase::Case4a => "case4a",
            StationaryCase::Case4b => "case4b",
            StationaryCase::NonStationary => "non-stationary",
        }
    }

    pub fn is_maximum(&self) -> bool {
        matches!(self, StationaryCase::Case4a | StationaryCase::Case4b)
    }
}

impl fmt::Display for StationaryCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    /// Highest-priority match (cases 1, 2, 3, 4 in that order).
    pub case: StationaryCase,
    /// Every case whose defining residual is within tolerance.
    pub matches: Vec<StationaryCase>,
}

/// Classifies a stationary point of `Z^2`.
///
/// Cases 1-3 (`sin g = 0`, `sin t = 0`, `cos f cos g = sin g cos t sin f`) are
/// the minima `Z^2 = 0`; case 4 (all of [`maximum_conditions`] vanish) the
/// maxima `Z^2 = 1/4`. Maxima on the arc through `(pi/2, pi/4, pi/2)`
/// (`|cos g| <= |cos t|`) are labelled `case4a`, the rest (the arc through
/// `(pi/4, pi/2, 0)`) `case4b`.
pub fn classify_stationary(gamma: f64, theta: f64, f: f64, tol: f64) -> Classification {
    let grad = z_squared_gradient(gamma, theta, f);
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if !(norm <= tol) {
        return Classification {
            case: StationaryCase::NonStationary,
            matches: vec![],
        };
    }
    let mut matches = Vec::new();
    if gamma.sin().abs() <= tol {
        matches.push(StationaryCase::Case1);
    }
    if theta.sin().abs() <= tol {
        matches.push(StationaryCase::Case2);
    }
    if z_factor(gamma, theta, f).abs() <= tol {
        matches.push(StationaryCase::Case3);
    }
    if maximum_conditions(gamma, theta, f).iter().all(|r| r.abs() <= tol) {
        if gamma.cos().abs() <= theta.cos().abs() {
            matches.push(StationaryCase::Case4a);
        } else {
            matches.push(StationaryCase::Case4b);
        }
    }
    Classification {
        case: matches.first().copied().unwrap_or(StationaryCase::NonStationary),
        matches,
    }
}

/// Multi-start search settings. Coordinates given in `fixed_*` are held
/// constant; the rest are searched over `[0, pi]^3 x [0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub n_starts: usize,
    pub seed: u64,
    pub fixed_alpha: Option<f64>,
    pub fixed_gamma: Option<f64>,
    pub fixed_theta: Option<f64>,
    pub fixed_f: Option<f64>,
    pub grad_tol: f64,
    pub max_iters: usize,
}

impl SearchOptions {
    pub fn new(n_starts: usize, seed: u64) -> Self {
        Self {
            n_starts: n_starts.max(1),
            seed,
            fixed_alpha: None,
            fixed_gamma: None,
            fixed_theta: None,
            fixed_f: None,
            grad_tol: 1e-10,
            max_iters: 500,
        }
    }

    fn fixed(&self) -> [Option<f64>; 4] {
        [self.fixed_alpha, self.fixed_gamma, self.fixed_theta, self.fixed_f]
    }
}

/// Result of [`maximize_det_qfim`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimumReport {
    pub alpha: f64,
    pub gamma: f64,
    pub theta: f64,
    pub f: f64,
    pub det_q: f64,
    pub z_squared: f64,
    pub s: Option<f64>,
    pub c_s: Option<f64>,
    pub c_h: Option<f64>,
    pub stationary_case: StationaryCase,
    pub matching_cases: Vec<StationaryCase>,
    pub starts_used: usize,
    pub best_start: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl OptimumReport {
    /// A concrete configuration realizing the optimum for the given probe
    /// phase and parameter values (`phi = 2 lambda1 + beta - f`).
    pub fn config_with(&self, beta: f64, lambda1: f64, lambda2: f64) -> Result<EncodingConfig> {
        EncodingConfig::from_effective_phase(
            self.alpha, beta, self.gamma, self.theta, self.f, lambda1, lambda2,
        )
    }
}

fn det_q(x: &[f64; 4]) -> f64 {
    64.0 * z_squared(x[1], x[2], x[3]) * x[0].sin().powi(2)
}

fn det_q_gradient(x: &[f64; 4], free: &[bool; 4]) -> [f64; 4] {
    let z2 = z_squared(x[1], x[2], x[3]);
    let s2 = x[0].sin().powi(2);
    let [gg, gt, gf] = z_squared_gradient(x[1], x[2], x[3]);
    let g = [
        64.0 * z2 * (2.0 * x[0]).sin(),
        64.0 * s2 * gg,
        64.0 * s2 * gt,
        64.0 * s2 * gf,
    ];
    std::array::from_fn(|i| if free[i] { g[i] } else { 0.0 })
}

struct StartOutcome {
    x: [f64; 4],
    value: f64,
    iterations: usize,
}

/// Gradient ascent with Armijo backtracking; one simplex pass if the line
/// search stalls.
fn ascend(mut x: [f64; 4], free: &[bool; 4], opts: &SearchOptions) -> StartOutcome {
    let mut value = det_q(&x);
    let mut step = 0.05;
    let mut used_simplex = false;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        iterations += 1;
        let g = det_q_gradient(&x, free);
        let g2: f64 = g.iter().map(|v| v * v).sum();
        if g2.sqrt() <= opts.grad_tol {
            break;
        }
        let mut t = step * 4.0;
        let mut accepted = false;
        while t > 1e-18 {
            let cand: [f64; 4] = std::array::from_fn(|i| x[i] + t * g[i]);
            let v = det_q(&cand);
            if v >= value + 1e-4 * t * g2 {
                x = cand;
                value = v;
                step = t;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if accepted {
            continue;
        }
        if used_simplex {
            break;
        }
        used_simplex = true;
        let idx: Vec<usize> = (0..4).filter(|&i| free[i]).collect();
        let base = x;
        let start: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
        let r = simplex::minimize(
            |y| {
                let mut p = base;
                for (k, &i) in idx.iter().enumerate() {
                    p[i] = y[k];
                }
                -det_q(&p)
            },
            &start,
            &SimplexOptions {
                step: 1e-3,
                f_tol: 1e-15,
                x_tol: 1e-12,
                max_evals: 5_000,
            },
        );
        if -r.value > value {
            for (k, &i) in idx.iter().enumerate() {
                x[i] = r.x[k];
            }
            value = -r.value;
        }
    }
    StartOutcome {
        x,
        value,
        iterations,
    }
}

/// Multi-start maximization of `det Q` over `(alpha, gamma, theta, f)`.
pub fn maximize_det_qfim(n_starts: usize, seed: u64) -> OptimumReport {
    maximize_det_qfim_with(&SearchOptions::new(n_starts, seed))
}

pub fn maximize_det_qfim_with(opts: &SearchOptions) -> OptimumReport {
    let fixed = opts.fixed();
    let free: [bool; 4] = std::array::from_fn(|i| fixed[i].is_none());
    let upper = [PI, PI, PI, 2.0 * PI];
    let n_starts = opts.n_starts.max(1);

    let outcomes: Vec<StartOutcome> = (0..n_starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng::stream(opts.seed, Purpose::OptimizerStart, k as u64);
            let x0: [f64; 4] = std::array::from_fn(|i| {
                let u: f64 = rng.random_range(0.0..upper[i]);
                fixed[i].unwrap_or(u)
            });
            ascend(x0, &free, opts)
        })
        .collect();

    let mut best = 0;
    for (k, o) in outcomes.iter().enumerate() {
        if o.value > outcomes[best].value {
            best = k;
        }
    }
    let o = &outcomes[best];
    let alpha = if free[0] { o.x[0].rem_euclid(PI) } else { o.x[0] };
    let f = if free[3] { o.x[3].rem_euclid(2.0 * PI) } else { o.x[3] };
    // gamma + pi only flips the sign of the scrambler
    let gamma = if free[1] { o.x[1].rem_euclid(PI) } else { o.x[1] };
    let theta = if free[2] { o.x[2].rem_euclid(2.0 * PI) } else { o.x[2] };
    let class = classify_stationary(gamma, theta, f, 1e-6);

    let cfg = EncodingConfig::from_effective_phase(alpha, 0.0, gamma, theta, f, 0.0, 0.0)
        .expect("optimizer iterates stay finite");
    let (q, _) = fisher::qfim_closed_form(&cfg);
    let w = WeightMatrix::identity();
    OptimumReport {
        alpha,
        gamma,
        theta,
        f,
        det_q: o.value,
        z_squared: z_squared(gamma, theta, f),
        s: q.inverse().map(|_| 1.0 / q.det()),
        c_s: bounds::sld_bound(&q, &w).ok(),
        c_h: bounds::holevo_nagaoka_bound(&q, &w).ok(),
        stationary_case: class.case,
        matching_cases: class.matches,
        starts_used: n_starts,
        best_start: best,
        iterations: o.iterations,
        seed: opts.seed,
    }
}
