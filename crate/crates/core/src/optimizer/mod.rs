//! Maximization of the entropy ratio `α(P) = min_j H(P) / H(π_{r_j} P)` over
//! the probability simplex or an affine slice of it.
//!
//! The objective is nonsmooth (it is a minimum), so local search is the
//! derivative-free Nelder-Mead polytope method, restarted from its own
//! optimum and run from many seeded starting points.

mod ansatz;
mod nelder_mead;
mod root;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::entropy::{
    entropy, xlogx, EntropyProfile, Measure, ProjectionTables, SIMPLEX_TOLERANCE,
};
use crate::error::{Error, Result};

pub use ansatz::{AffineParam, LinearRelation, SymmetryAnsatz};
pub use nelder_mead::{minimize, NelderMeadOutcome, NelderMeadSettings};
pub use root::solve_equalization_root;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerOptions {
    pub starts: usize,
    pub seed: u64,
    pub max_evals: usize,
    pub tol: f64,
    /// Log-sum-exp smoothing of the inner minimum; `None` optimizes the raw
    /// minimum.
    pub softmin_temperature: Option<f64>,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            starts: 64,
            seed: 0,
            max_evals: 20_000,
            tol: 1e-12,
            softmin_temperature: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub best_measure: Measure,
    pub best_alpha: f64,
    pub profile: EntropyProfile,
    pub starts_used: usize,
    pub converged: bool,
    pub seed: u64,
}

impl Serialize for OptimizationResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(6))?;
        map.serialize_entry("best_measure", self.best_measure.weights())?;
        map.serialize_entry("best_alpha", &self.best_alpha)?;
        map.serialize_entry("profile", &self.profile)?;
        map.serialize_entry("starts_used", &self.starts_used)?;
        map.serialize_entry("converged", &self.converged)?;
        map.serialize_entry("seed", &self.seed)?;
        map.end()
    }
}

/// Initial polytope edge relative to each free coordinate, and the edge used
/// for coordinates sitting at zero.
const INITIAL_STEP: f64 = 0.05;
const ZERO_STEP: f64 = 2.5e-4;
const MIN_RESTART_STEP: f64 = 1e-7;

/// The (possibly smoothed) maximin objective at a feasible weight vector.
struct Objective<'a> {
    tables: &'a ProjectionTables,
    param: &'a AffineParam,
    temperature: Option<f64>,
    weights: Vec<f64>,
    scratch: Vec<f64>,
    projected: Vec<f64>,
}

impl<'a> Objective<'a> {
    fn new(tables: &'a ProjectionTables, param: &'a AffineParam, temperature: Option<f64>) -> Self {
        Objective {
            tables,
            param,
            temperature,
            weights: Vec::with_capacity(param.n_points()),
            scratch: Vec::new(),
            projected: Vec::new(),
        }
    }

    /// Negated objective for the minimizer; `+∞` when infeasible or
    /// degenerate.
    fn loss(&mut self, t: &[f64]) -> f64 {
        if !self
            .param
            .feasible_into(t, &mut self.weights, SIMPLEX_TOLERANCE)
        {
            return f64::INFINITY;
        }
        let h: f64 = self.weights.iter().map(|&p| xlogx(p)).sum();
        self.tables
            .projected_entropies_into(&self.weights, &mut self.scratch, &mut self.projected);
        let worst = self.projected.iter().copied().fold(0.0, f64::max);
        if worst <= 0.0 {
            return f64::INFINITY;
        }
        match self.temperature {
            None => -(h / worst),
            Some(temp) => {
                let ratios = self
                    .projected
                    .iter()
                    .filter(|&&hj| hj > 0.0)
                    .map(|&hj| h / hj);
                let least = ratios.clone().fold(f64::INFINITY, f64::min);
                let sum: f64 = ratios.map(|r| (-(r - least) / temp).exp()).sum();
                -(least - temp * sum.ln())
            }
        }
    }
}

struct StartOutcome {
    weights: Vec<f64>,
    alpha: f64,
    converged: bool,
}

fn run_start(
    tables: &ProjectionTables,
    param: &AffineParam,
    start: &[f64],
    opts: &OptimizerOptions,
) -> Option<StartOutcome> {
    let mut objective = Objective::new(tables, param, opts.softmin_temperature);
    let mut x = start.to_vec();
    let mut value = objective.loss(&x);
    if value == f64::INFINITY {
        return None;
    }
    let mut budget = opts.max_evals;
    let mut step = INITIAL_STEP;
    let mut converged = false;
    while budget > 0 {
        let out = minimize(
            |t| objective.loss(t),
            &x,
            NelderMeadSettings {
                initial_step: step,
                zero_step: ZERO_STEP * step / INITIAL_STEP,
                max_evals: budget,
                tol: opts.tol,
            },
        );
        budget = budget.saturating_sub(out.evals);
        let gain = value - out.value;
        if out.value < value {
            x = out.x;
            value = out.value;
        }
        if !out.converged {
            break;
        }
        // converged polytope: restart around the optimum, stop once a restart
        // no longer moves the value
        if gain < opts.tol {
            converged = true;
            if step <= MIN_RESTART_STEP {
                break;
            }
            step *= 0.1;
        }
    }
    let weights = param.feasible(&x, SIMPLEX_TOLERANCE)?;
    let profile = tables.profile(&Measure::from_raw(weights.clone())).ok()?;
    Some(StartOutcome {
        weights,
        alpha: profile.alpha,
        converged,
    })
}

/// The ordered list of starting points in free coordinates: uniform, the
/// equalization point when the ansatz is one-dimensional, then seeded
/// random interior points. Prefixes do not depend on `count`.
fn starting_points(
    c: &Configuration,
    param: &AffineParam,
    ansatz: Option<&SymmetryAnsatz>,
    count: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let n = c.len();
    let mut starts = Vec::with_capacity(count);
    starts.push(param.coords(Measure::uniform(n).weights()));
    if let Some(a) = ansatz {
        if let Ok(m) = equalize_profile(c, a) {
            starts.push(param.coords(m.weights()));
        }
    }
    let reference = starts
        .iter()
        .find(|t| param.feasible(t, SIMPLEX_TOLERANCE).is_some())
        .cloned();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while starts.len() < count {
        let draws: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).collect();
        let total: f64 = draws.iter().sum();
        let weights: Vec<f64> = draws.iter().map(|d| d / total).collect();
        let mut t = param.coords(&weights);
        if let Some(r) = &reference {
            for _ in 0..40 {
                if param.feasible(&t, SIMPLEX_TOLERANCE).is_some() {
                    break;
                }
                t.iter_mut().zip(r).for_each(|(x, y)| *x = 0.5 * (*x + y));
            }
        }
        starts.push(t);
    }
    starts.truncate(count.max(1));
    starts
}

fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

/// Multi-start maximization of `α(P)`, optionally restricted by an ansatz.
///
/// Starts run in parallel; the winner is chosen by a reduction in start
/// order (highest α, then the lexicographically smallest measure), so the
/// result depends only on the inputs and the seed.
pub fn maximize_alpha(
    c: &Configuration,
    ansatz: Option<&SymmetryAnsatz>,
    opts: &OptimizerOptions,
) -> Result<OptimizationResult> {
    if c.len() == 1 {
        return Err(Error::DegenerateDenominator);
    }
    let param = match ansatz {
        Some(a) => AffineParam::new(c.len(), a)?,
        None => AffineParam::simplex(c.len()),
    };
    let tables = ProjectionTables::new(c);
    let starts = starting_points(c, &param, ansatz, opts.starts, opts.seed);

    let outcomes: Vec<Option<StartOutcome>> = starts
        .par_iter()
        .map(|s| run_start(&tables, &param, s, opts))
        .collect();

    let mut best: Option<StartOutcome> = None;
    for out in outcomes.into_iter().flatten() {
        let better = match &best {
            None => true,
            Some(b) => {
                out.alpha > b.alpha
                    || (out.alpha == b.alpha && lexicographic(&out.weights, &b.weights).is_lt())
            }
        };
        if better {
            best = Some(out);
        }
    }
    let Some(best) = best else {
        return Err(if ansatz.is_some() {
            Error::InvalidAnsatz("no feasible starting measure".into())
        } else {
            Error::DegenerateDenominator
        });
    };
    let measure = Measure::from_raw(best.weights);
    let profile = tables.profile(&measure)?;
    Ok(OptimizationResult {
        best_alpha: profile.alpha,
        best_measure: measure,
        profile,
        starts_used: starts.len(),
        converged: best.converged,
        seed: opts.seed,
    })
}

/// Samples used to decide which projected entropies coincide identically
/// along a one-parameter family.
const CLASS_SAMPLES: usize = 64;
const CLASS_TOLERANCE: f64 = 1e-12;
/// Subintervals scanned for sign changes of the equalization equation.
const SCAN_INTERVALS: usize = 1024;

/// Solves the entropy-equalization equation on a one-parameter ansatz.
///
/// Slopes whose projected entropies agree identically along the family are
/// grouped; exactly two groups must remain, and the returned measure makes
/// them equal. When the equation has several roots, the one with the largest
/// α wins.
pub fn equalize_profile(c: &Configuration, ansatz: &SymmetryAnsatz) -> Result<Measure> {
    let param = AffineParam::new(c.len(), ansatz)?;
    if param.dim() != 1 {
        return Err(Error::NotOneDimensional(param.dim()));
    }
    let (lo, hi) = param
        .interval()
        .ok_or_else(|| Error::InvalidAnsatz("empty feasible set".into()))?;
    let tables = ProjectionTables::new(c);
    let at = |t: f64| tables.projected_entropies(&param.raw(&[t]));

    let samples: Vec<Vec<f64>> = (1..=CLASS_SAMPLES)
        .map(|i| at(lo + (hi - lo) * i as f64 / (CLASS_SAMPLES + 1) as f64))
        .collect();
    let n_slopes = c.slopes().len();
    let mut reps: Vec<usize> = Vec::new();
    for j in 0..n_slopes {
        let same = |k: usize| {
            samples
                .iter()
                .all(|h| (h[j] - h[k]).abs() <= CLASS_TOLERANCE)
        };
        if !reps.iter().any(|&k| same(k)) {
            reps.push(j);
        }
    }
    let (a, b) = match reps.as_slice() {
        [_] => return Err(Error::FlatEquation),
        [a, b] => (*a, *b),
        more => return Err(Error::Overdetermined(more.len())),
    };
    let gap = |t: f64| {
        let h = at(t);
        h[a] - h[b]
    };

    let grid: Vec<f64> = (1..SCAN_INTERVALS)
        .map(|i| lo + (hi - lo) * i as f64 / SCAN_INTERVALS as f64)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&t| gap(t)).collect();
    let mut best: Option<(f64, Measure)> = None;
    for (w, v) in grid.windows(2).zip(values.windows(2)) {
        if v[0].signum() == v[1].signum() || v[0] == 0.0 {
            continue;
        }
        let t = solve_equalization_root(gap, w[0], w[1])?;
        let m = Measure::new(param.feasible(&[t], SIMPLEX_TOLERANCE).ok_or_else(|| {
            Error::InvalidAnsatz("equalization root left the feasible set".into())
        })?)?;
        let h = entropy(&m);
        let worst = tables
            .projected_entropies(m.weights())
            .into_iter()
            .fold(0.0, f64::max);
        if worst <= 0.0 {
            continue;
        }
        let alpha = h / worst;
        if best.as_ref().is_none_or(|(ba, _)| alpha > *ba) {
            best = Some((alpha, m));
        }
    }
    best.map(|(_, m)| m).ok_or(Error::NoBracket { lo, hi })
}
