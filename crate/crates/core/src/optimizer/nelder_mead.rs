//! Nelder-Mead polytope search (minimization). Infeasible points are
//! reported by the objective as `+∞` and are never accepted.

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadSettings {
    /// Relative size of the initial polytope edge along nonzero coordinates.
    pub initial_step: f64,
    /// Absolute edge along coordinates that start at zero.
    pub zero_step: f64,
    pub max_evals: usize,
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub struct NelderMeadOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

pub fn minimize<F>(mut f: F, x0: &[f64], settings: NelderMeadSettings) -> NelderMeadOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
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

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let v0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), v0));
    for i in 0..dim {
        let mut x = x0.to_vec();
        let step = if x0[i] != 0.0 {
            settings.initial_step * x0[i]
        } else {
            settings.zero_step
        };
        x[i] += step;
        let mut v = eval(&x, &mut evals);
        if v == f64::INFINITY {
            // step onto the other side before giving up on this edge
            x[i] = x0[i] - step;
            v = eval(&x, &mut evals);
        }
        simplex.push((x, v));
    }

    let cycle = dim + 1;
    let mut iter = 0usize;
    let mut cycle_start_best = f64::INFINITY;
    let mut converged = false;
    let mut centroid = vec![0.0; dim];
    let mut trial = vec![0.0; dim];

    while evals < settings.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if iter.is_multiple_of(cycle) {
            let best = simplex[0].1;
            let spread = simplex[dim].1 - best;
            if iter > 0 && cycle_start_best - best < settings.tol && spread.abs() < settings.tol {
                converged = true;
                break;
            }
            cycle_start_best = best;
        }
        iter += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (x, _) in &simplex[..dim] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / dim as f64;
            }
        }
        let worst = simplex[dim].0.clone();
        let f_worst = simplex[dim].1;
        let f_best = simplex[0].1;
        let f_second = simplex[dim.saturating_sub(1)].1;

        let along = |coef: f64, out: &mut Vec<f64>| {
            for ((o, c), w) in out.iter_mut().zip(&centroid).zip(&worst) {
                *o = c + coef * (c - w);
            }
        };

        along(REFLECT, &mut trial);
        let f_r = eval(&trial, &mut evals);
        if f_r < f_best {
            let reflected = trial.clone();
            along(EXPAND, &mut trial);
            let f_e = eval(&trial, &mut evals);
            simplex[dim] = if f_e < f_r {
                (trial.clone(), f_e)
            } else {
                (reflected, f_r)
            };
            continue;
        }
        if f_r < f_second {
            simplex[dim] = (trial.clone(), f_r);
            continue;
        }
        let (coef, reference) = if f_r < f_worst {
            (CONTRACT, f_r)
        } else {
            (-CONTRACT, f_worst)
        };
        along(coef, &mut trial);
        let f_c = eval(&trial, &mut evals);
        if f_c < reference {
            simplex[dim] = (trial.clone(), f_c);
            continue;
        }
        let best = simplex[0].0.clone();
        for (x, v) in simplex.iter_mut().skip(1) {
            for (xi, bi) in x.iter_mut().zip(&best) {
                *xi = bi + SHRINK * (*xi - bi);
            }
            *v = eval(x, &mut evals);
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    NelderMeadOutcome {
        x,
        value,
        evals,
        converged,
    }
}
