//! Nelder-Mead downhill simplex minimizer.

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Initial step along each coordinate.
    pub step: f64,
    /// Stop once the spread of objective values across the simplex falls
    /// below this.
    pub f_tol: f64,
    /// ... and the largest vertex offset from the best vertex falls below this.
    pub x_tol: f64,
    pub max_evals: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            step: 0.1,
            f_tol: 1e-12,
            x_tol: 1e-10,
            max_evals: 20_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0`.
pub fn minimize<F>(mut f: F, x0: &[f64], opts: &SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p, &mut evals)).collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut converged = false;
    while evals < opts.max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let spread = vals[n] - vals[0];
        let diameter = pts[1..]
            .iter()
            .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= opts.f_tol && diameter <= opts.x_tol {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; n];
        for p in &pts[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&pts[n])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(alpha);
        let fr = eval(&xr, &mut evals);
        if fr < vals[0] {
            let xe = along(gamma);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let xc = along(rho);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < vals[n].min(fr) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        // shrink towards the best vertex
        for i in 1..=n {
            let p: Vec<f64> = pts[0]
                .iter()
                .zip(&pts[i])
                .map(|(b, x)| b + sigma * (x - b))
                .collect();
            vals[i] = eval(&p, &mut evals);
            pts[i] = p;
        }
    }

    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    SimplexResult {
        x: pts[best].clone(),
        value: vals[best],
        evals,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let r = minimize(
            |x| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2),
            &[0.0, 0.0],
            &SimplexOptions::default(),
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] + 2.0).abs() < 1e-5);
    }

    #[test]
    fn rosenbrock() {
        let r = minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &SimplexOptions {
                step: 0.5,
                ..Default::default()
            },
        );
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4, "{:?}", r);
    }

    #[test]
    fn one_dimensional() {
        let r = minimize(|x| -(x[0] - 0.3).cos(), &[0.0], &SimplexOptions::default());
        assert!((r.x[0] - 0.3).abs() < 1e-5);
    }

    #[test]
    fn nan_treated_as_worst() {
        let r = minimize(
            |x| if x[0] < 0.0 { f64::NAN } else { (x[0] - 0.5).powi(2) },
            &[0.1],
            &SimplexOptions::default(),
        );
        assert!((r.x[0] - 0.5).abs() < 1e-5);
    }
}
