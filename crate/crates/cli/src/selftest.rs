//! `--self-test`: Werner golden grid plus a reduced domination suite.

use rayon::prelude::*;
use serde_json::json;
use steercert::canonical::canonicalize;
use steercert::lhsmodel::domination_check;
use steercert::qstate::werner;
use steercert::sampling::{random_canonical_state, random_direction, stream_rng};
use steercert::steercrit::{certify_projective, maximize_objective, MaximizeOptions};

use crate::exit::{Failure, CERTIFIED, NOT_CERTIFIED};
use crate::render::Sink;

const WERNER_STEPS: usize = 20;
const WERNER_OFFSET: f64 = 1e-6;
const DOMINATION_STATES: usize = 200;
const DOMINATION_DIRECTIONS: usize = 20;

/// Failures of the Werner grid: certified just below `eps = 2(1 - mu)`, not just above.
fn werner_failures(opts: &MaximizeOptions) -> Result<(usize, usize), Failure> {
    let results: Vec<(usize, usize)> = (0..=WERNER_STEPS)
        .into_par_iter()
        .map(|k| {
            let mu = k as f64 / WERNER_STEPS as f64;
            let c = canonicalize(&werner(mu)?)?;
            let boundary = 2.0 * (1.0 - mu);
            let mut cases = 0;
            let mut failures = 0;
            if c.trivially_nonsteerable {
                return Ok((1, 0));
            }
            let below = (boundary - WERNER_OFFSET).clamp(0.0, 1.0);
            cases += 1;
            if !certify_projective(&c.canonical, below, opts)?.certified {
                failures += 1;
            }
            if boundary + WERNER_OFFSET <= 1.0 {
                cases += 1;
                if certify_projective(&c.canonical, boundary + WERNER_OFFSET, opts)?.certified {
                    failures += 1;
                }
            }
            Ok((cases, failures))
        })
        .collect::<Result<_, Failure>>()?;
    Ok(results.into_iter().fold((0, 0), |(a, b), (c, d)| (a + c, b + d)))
}

/// Random certified states must be dominated in every sampled direction.
fn domination_failures(seed: u64, opts: &MaximizeOptions) -> Result<(usize, usize, usize), Failure> {
    let results: Vec<(usize, usize, usize)> = (0..DOMINATION_STATES)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let c = random_canonical_state(&mut rng);
            let eps: f64 = rand_eps(&mut rng);
            let (max, argmax) = maximize_objective(&c, eps, opts)?;
            if max > 1.0 {
                return Ok((0, 0, 0));
            }
            let mut checks = 0;
            let mut failures = 0;
            let dirs = std::iter::once(argmax).chain((0..DOMINATION_DIRECTIONS).map(|_| random_direction(&mut rng)));
            for x in dirs.collect::<Vec<_>>() {
                checks += 1;
                if !domination_check(&c, eps, &x)?.dominated {
                    failures += 1;
                }
            }
            Ok((1, checks, failures))
        })
        .collect::<Result<_, Failure>>()?;
    Ok(results.into_iter().fold((0, 0, 0), |(a, b, c), (d, e, f)| (a + d, b + e, c + f)))
}

fn rand_eps<R: rand::Rng>(rng: &mut R) -> f64 {
    rng.random_range(0.0..=1.0)
}

pub fn run(seed: u64, sink: &mut Sink) -> Result<u8, Failure> {
    let opts = MaximizeOptions::default();
    let (werner_cases, werner_fail) = werner_failures(&opts)?;
    let (states, checks, dom_fail) = domination_failures(seed, &opts)?;
    let passed = werner_fail == 0 && dom_fail == 0;
    sink.json(json!({
        "werner_cases": werner_cases,
        "werner_failures": werner_fail,
        "domination_states": states,
        "domination_checks": checks,
        "domination_failures": dom_fail,
        "passed": passed,
    }))?;
    sink.csv_row(
        &["werner_cases", "werner_failures", "domination_states", "domination_checks", "domination_failures", "passed"],
        [werner_cases, werner_fail, states, checks, dom_fail].iter().map(|n| n.to_string()).chain([passed.to_string()]).collect(),
    )?;
    Ok(if passed { CERTIFIED } else { NOT_CERTIFIED })
}
