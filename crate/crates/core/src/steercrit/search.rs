//! Random-restart hill climbing over physical canonical states for states
//! with `max_x (||T x|| + |a·x|) > 1`, i.e. states that no loss level
//! certifies.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::{maximize_objective, MaximizeOptions, MeasurementDirection};
use crate::canonical::CanonicalState;
use crate::error::{Error, Result};
use crate::qstate::{pauli_compose, physicality_check};
use crate::sampling::{random_canonical_state, stream_rng};

/// Values must exceed `1 + HIT_MARGIN` to be reported.
pub const HIT_MARGIN: f64 = 1e-9;
/// Minimum eigenvalue slack accepted for a candidate state.
const STRICT_PHYSICALITY_TOL: f64 = 1e-12;
const INITIAL_STEP: f64 = 0.05;
const STEP_DECAY: f64 = 0.97;
const MIN_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub seed: u64,
    /// Total number of candidate-state evaluations across all restarts.
    pub budget: usize,
    pub steps_per_restart: usize,
    pub grid_points: usize,
}

impl SearchOptions {
    pub fn new(seed: u64, budget: usize) -> Self {
        Self { seed, budget, steps_per_restart: 100, grid_points: 1024 }
    }

    pub fn restarts(&self) -> usize {
        self.budget.div_ceil(self.steps_per_restart)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchHit {
    pub restart: usize,
    pub canonical: CanonicalState,
    pub value: f64,
    pub argmax: MeasurementDirection,
}

/// Outcome of a single restart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartResult {
    pub restart: usize,
    pub evaluations: usize,
    pub best_value: f64,
    pub best: CanonicalState,
    pub hits: Vec<SearchHit>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    pub seed: u64,
    pub budget: usize,
    pub evaluations: usize,
    pub best_value: f64,
    pub best: CanonicalState,
    pub hits: Vec<SearchHit>,
}

fn strictly_physical(a: [f64; 3], t: [f64; 3]) -> Option<CanonicalState> {
    let c = CanonicalState::new_unchecked(a, t);
    let rho = pauli_compose(&c.pauli_form()).ok()?;
    physicality_check(rho.matrix(), STRICT_PHYSICALITY_TOL).pass.then_some(c)
}

fn score(c: &CanonicalState, opts: &MaximizeOptions) -> Result<(f64, MeasurementDirection)> {
    maximize_objective(c, 0.0, opts)
}

/// Runs restart `index` for at most `evaluations` candidate states.
pub fn search_restart(opts: &SearchOptions, index: usize, evaluations: usize) -> Result<RestartResult> {
    let inner = MaximizeOptions::with_grid_points(opts.grid_points);
    let mut rng = stream_rng(opts.seed, index as u64);
    let mut current = loop {
        let c = random_canonical_state(&mut rng);
        if let Some(c) = strictly_physical(c.a, c.t) {
            break c;
        }
    };
    let (mut value, x0) = score(&current, &inner)?;
    let mut hits = Vec::new();
    let record = |c: &CanonicalState, v: f64, x: MeasurementDirection, hits: &mut Vec<SearchHit>| {
        if v > 1.0 + HIT_MARGIN {
            hits.push(SearchHit { restart: index, canonical: c.clone(), value: v, argmax: x });
        }
    };
    record(&current, value, x0, &mut hits);

    let mut step = INITIAL_STEP;
    for _ in 1..evaluations {
        let mut perturb = |v: &[f64; 3]| -> [f64; 3] {
            std::array::from_fn(|i| {
                let n: f64 = StandardNormal.sample(&mut rng);
                v[i] + step * n
            })
        };
        let a = perturb(&current.a);
        let t = perturb(&current.t);
        if let Some(candidate) = strictly_physical(a, t) {
            let (v, x) = score(&candidate, &inner)?;
            record(&candidate, v, x, &mut hits);
            if v > value {
                current = candidate;
                value = v;
                continue;
            }
        }
        step = (step * STEP_DECAY).max(MIN_STEP);
        // Occasional large jump to leave flat regions.
        if rng.random::<f64>() < 0.02 {
            step = INITIAL_STEP;
        }
    }
    Ok(RestartResult { restart: index, evaluations, best_value: value, best: current, hits })
}

/// Evaluation counts for each restart so that they sum to the budget.
pub fn restart_schedule(opts: &SearchOptions) -> Vec<usize> {
    let n = opts.restarts();
    (0..n).map(|i| (opts.budget - i * opts.steps_per_restart).min(opts.steps_per_restart)).collect()
}

pub fn search_counterexample(opts: &SearchOptions) -> Result<SearchReport> {
    if opts.budget == 0 {
        return Err(Error::InvalidParameter("search budget must be at least 1".into()));
    }
    if opts.steps_per_restart == 0 {
        return Err(Error::InvalidParameter("steps per restart must be at least 1".into()));
    }
    let schedule = restart_schedule(opts);
    let results: Vec<RestartResult> = schedule
        .par_iter()
        .enumerate()
        .map(|(i, &n)| search_restart(opts, i, n))
        .collect::<Result<_>>()?;
    Ok(merge_restarts(opts, results))
}

/// Combines restart results in restart order.
pub fn merge_restarts(opts: &SearchOptions, results: Vec<RestartResult>) -> SearchReport {
    let mut best: Option<(f64, CanonicalState)> = None;
    let mut hits = Vec::new();
    let mut evaluations = 0;
    for r in results {
        evaluations += r.evaluations;
        if best.as_ref().is_none_or(|(v, _)| r.best_value > *v) {
            best = Some((r.best_value, r.best.clone()));
        }
        hits.extend(r.hits);
    }
    let (best_value, best) = best.expect("at least one restart");
    SearchReport { seed: opts.seed, budget: opts.budget, evaluations, best_value, best, hits }
}
