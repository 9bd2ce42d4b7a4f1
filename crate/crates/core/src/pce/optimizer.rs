//! Nelder–Mead simplex descent.

use std::time::Instant;

use serde::{Deserialize, Serialize};

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NelderMeadOptions {
    /// Evaluation budget. The last iteration may overshoot it by at most
    /// `dim + 1` evaluations.
    pub max_evals: usize,
    /// Relative perturbation of each nonzero coordinate in the initial simplex.
    pub initial_step: f64,
    /// Absolute step for coordinates that start at zero.
    pub zero_step: f64,
    pub xatol: f64,
    pub fatol: f64,
    #[serde(skip)]
    pub deadline: Option<Instant>,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evals: 2000,
            initial_step: 0.05,
            zero_step: 0.00025,
            xatol: 1e-4,
            fatol: 1e-4,
            deadline: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    BudgetExhausted,
    Deadline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalResult {
    pub theta: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub status: StopReason,
}

/// Minimise `f` from `theta0`. The result is never worse than `f(theta0)`.
pub fn local_optimize(mut f: impl FnMut(&[f64]) -> f64, theta0: &[f64], opts: &NelderMeadOptions) -> LocalResult {
    let dim = theta0.len();
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let f0 = eval(theta0, &mut evals);
    if dim == 0 {
        return LocalResult {
            theta: Vec::new(),
            value: f0,
            evals,
            status: StopReason::Converged,
        };
    }

    let mut sim: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    let mut fs: Vec<f64> = Vec::with_capacity(dim + 1);
    sim.push(theta0.to_vec());
    fs.push(f0);
    for k in 0..dim {
        if evals >= opts.max_evals.max(1) {
            break;
        }
        let mut y = theta0.to_vec();
        y[k] = if y[k] != 0.0 {
            (1.0 + opts.initial_step) * y[k]
        } else {
            opts.zero_step
        };
        fs.push(eval(&y, &mut evals));
        sim.push(y);
    }
    if sim.len() < dim + 1 {
        let best = argmin(&fs);
        return LocalResult {
            theta: sim.swap_remove(best),
            value: fs[best],
            evals,
            status: StopReason::BudgetExhausted,
        };
    }
    sort_simplex(&mut sim, &mut fs);

    let status = loop {
        let spread_x = sim[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&sim[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        let spread_f = fs[1..].iter().map(|v| (v - fs[0]).abs()).fold(0.0f64, f64::max);
        if spread_x <= opts.xatol && spread_f <= opts.fatol {
            break StopReason::Converged;
        }
        if evals >= opts.max_evals {
            break StopReason::BudgetExhausted;
        }
        if opts.deadline.is_some_and(|d| Instant::now() >= d) {
            break StopReason::Deadline;
        }

        let mut centroid = vec![0.0; dim];
        for v in &sim[..dim] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= dim as f64);
        let worst = &sim[dim];
        let towards = |t: f64| -> Vec<f64> {
            // centroid + t * (centroid - worst)
            centroid.iter().zip(worst).map(|(c, w)| c + t * (c - w)).collect()
        };

        let xr = towards(REFLECT);
        let fr = eval(&xr, &mut evals);
        let mut shrink = false;
        if fr < fs[0] {
            let xe = towards(REFLECT * EXPAND);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                sim[dim] = xe;
                fs[dim] = fe;
            } else {
                sim[dim] = xr;
                fs[dim] = fr;
            }
        } else if fr < fs[dim - 1] {
            sim[dim] = xr;
            fs[dim] = fr;
        } else if fr < fs[dim] {
            let xc = towards(CONTRACT * REFLECT);
            let fc = eval(&xc, &mut evals);
            if fc <= fr {
                sim[dim] = xc;
                fs[dim] = fc;
            } else {
                shrink = true;
            }
        } else {
            let xcc = towards(-CONTRACT);
            let fcc = eval(&xcc, &mut evals);
            if fcc < fs[dim] {
                sim[dim] = xcc;
                fs[dim] = fcc;
            } else {
                shrink = true;
            }
        }
        if shrink {
            let best = sim[0].clone();
            for j in 1..=dim {
                for (x, b) in sim[j].iter_mut().zip(&best) {
                    *x = b + SHRINK * (*x - b);
                }
                fs[j] = eval(&sim[j], &mut evals);
            }
        }
        sort_simplex(&mut sim, &mut fs);
    };

    LocalResult {
        theta: sim.swap_remove(0),
        value: fs[0],
        evals,
        status,
    }
}

fn argmin(fs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in fs.iter().enumerate() {
        if v < fs[best] {
            best = i;
        }
    }
    best
}

/// Stable sort by value, so ties keep their current order.
fn sort_simplex(sim: &mut Vec<Vec<f64>>, fs: &mut Vec<f64>) {
    let mut order: Vec<usize> = (0..fs.len()).collect();
    order.sort_by(|&a, &b| fs[a].total_cmp(&fs[b]));
    let new_sim = order.iter().map(|&i| std::mem::take(&mut sim[i])).collect();
    let new_fs = order.iter().map(|&i| fs[i]).collect();
    *sim = new_sim;
    *fs = new_fs;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let opts = NelderMeadOptions {
            max_evals: 500,
            xatol: 1e-8,
            fatol: 1e-10,
            ..Default::default()
        };
        let r = local_optimize(|t| t.iter().map(|v| v * v).sum(), &[1.0, 1.0], &opts);
        assert!(r.value < 1e-6, "{r:?}");
        assert!(r.evals <= 500 + 3);
    }

    #[test]
    fn rosenbrock() {
        let opts = NelderMeadOptions {
            max_evals: 5000,
            xatol: 1e-8,
            fatol: 1e-12,
            ..Default::default()
        };
        let rosen = |t: &[f64]| 100.0 * (t[1] - t[0] * t[0]).powi(2) + (1.0 - t[0]).powi(2);
        let r = local_optimize(rosen, &[-1.2, 1.0], &opts);
        assert!(r.value < 1e-4, "{r:?}");
    }

    #[test]
    fn constant_loss_keeps_start() {
        let r = local_optimize(|_| 3.0, &[0.4, -1.0, 2.0], &NelderMeadOptions::default());
        assert_eq!(r.theta, vec![0.4, -1.0, 2.0]);
        assert_eq!(r.value, 3.0);
    }

    #[test]
    fn never_worse_than_start() {
        let opts = NelderMeadOptions {
            max_evals: 7,
            ..Default::default()
        };
        let f = |t: &[f64]| (t[0] - 3.0).abs() + t[1].sin();
        let start = [0.5, 0.1];
        let r = local_optimize(f, &start, &opts);
        assert!(r.value <= f(&start));
        assert_eq!(r.status, StopReason::BudgetExhausted);
    }
}
