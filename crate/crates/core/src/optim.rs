//! Derivative-free minimization by the Nelder-Mead simplex method with the
//! dimension-adaptive coefficients of Gao and Han.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexOptions {
    /// Stop when the spread of objective values over the simplex is below this.
    pub f_tol: f64,
    /// ... and every vertex lies within this distance (max-norm) of the best.
    pub x_tol: f64,
    pub max_evals: usize,
    /// Number of restarts from the best vertex after convergence.
    pub restarts: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            f_tol: 1e-8,
            x_tol: 1e-4,
            max_evals: 20_000,
            restarts: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0` with initial simplex edges `steps`. Non-finite
/// objective values are treated as `+inf`.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    steps: &[f64],
    opts: &SimplexOptions,
) -> Minimum {
    assert_eq!(x0.len(), steps.len());
    let mut evals = 0;
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut best = Minimum {
        x: x0.to_vec(),
        f: f64::INFINITY,
        evaluations: 0,
        converged: false,
    };
    let mut start = x0.to_vec();
    let mut rounds = 0;
    loop {
        let remaining = opts.max_evals.saturating_sub(evals);
        let (x, fx, converged, used) = run(&mut eval, &start, steps, opts, remaining);
        evals += used;
        let improved = best.f - fx;
        let first = rounds == 0;
        if fx <= best.f {
            best.x = x.clone();
            best.f = fx;
        }
        best.converged = converged;
        rounds += 1;
        if !converged || rounds > opts.restarts || (!first && improved.abs() <= opts.f_tol) {
            break;
        }
        start = x;
    }
    best.evaluations = evals;
    best
}

fn run<E: FnMut(&[f64]) -> f64>(
    eval: &mut E,
    x0: &[f64],
    steps: &[f64],
    opts: &SimplexOptions,
    budget: usize,
) -> (Vec<f64>, f64, bool, usize) {
    let n = x0.len();
    if n == 0 {
        return (Vec::new(), eval(x0), true, 1);
    }
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = if n >= 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };
    let mut used = 0;
    let mut call = |x: &[f64], used: &mut usize| {
        *used += 1;
        eval(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), call(x0, &mut used)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += steps[i];
        let fx = call(&x, &mut used);
        simplex.push((x, fx));
    }
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let f_best = simplex[0].1;
        let f_worst = simplex[n].1;
        let spread = if f_best.is_finite() && f_worst.is_finite() {
            f_worst - f_best
        } else {
            f64::INFINITY
        };
        let size = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= opts.f_tol && size <= opts.x_tol {
            converged = true;
            break;
        }
        if used >= budget {
            break;
        }
        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / nf;
            }
        }
        let towards = |coef: f64, out: &mut [f64], worst: &[f64]| {
            for i in 0..n {
                out[i] = centroid[i] + coef * (centroid[i] - worst[i]);
            }
        };
        let worst = simplex[n].0.clone();
        towards(alpha, &mut trial, &worst);
        let f_reflect = call(&trial, &mut used);
        let f_second = simplex[n - 1].1;
        if f_reflect < f_best {
            let reflected = trial.clone();
            towards(alpha * beta, &mut trial, &worst);
            let f_expand = call(&trial, &mut used);
            simplex[n] = if f_expand < f_reflect {
                (trial.clone(), f_expand)
            } else {
                (reflected, f_reflect)
            };
            continue;
        }
        if f_reflect < f_second {
            simplex[n] = (trial.clone(), f_reflect);
            continue;
        }
        let outside = f_reflect < f_worst;
        towards(
            if outside { alpha * gamma } else { -gamma },
            &mut trial,
            &worst,
        );
        let f_contract = call(&trial, &mut used);
        if (outside && f_contract <= f_reflect) || (!outside && f_contract < f_worst) {
            simplex[n] = (trial.clone(), f_contract);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            for (v, a) in vertex.0.iter_mut().zip(&anchor) {
                *v = a + delta * (*v - a);
            }
            vertex.1 = call(&vertex.0, &mut used);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f) = simplex.swap_remove(0);
    (x, f, converged, used)
}
