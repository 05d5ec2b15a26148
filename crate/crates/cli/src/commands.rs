use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};
use steercert::canonical::canonicalize;
use steercert::lhsmodel::{
    domination_check, lhs_assemblage, lhs_assemblage_mc, quantum_assemblage, reproduce_assemblage, DominationReport,
    Outcome,
};
use steercert::qstate::io::state_from_str;
use steercert::qstate::{trace_distance, DensityMatrix};
use steercert::sampling::{random_direction, stream_rng};
use steercert::steercrit::{
    epsilon_threshold, maximize_objective, merge_restarts, restart_schedule, search_restart, ConditionKind,
    MaximizeOptions, MeasurementDirection, SearchOptions, Verdict, CERTIFY_TOL,
};
use steercert::tomo::{bootstrap_member, certify_state, reconstruct, summarize_members, CountsRecord, MemberResult};
use steercert::Error;

use crate::args::{BootstrapArgs, CertifyArgs, LhsVerifyArgs, SearchArgs, StateArgs, ThresholdArgs};
use crate::exit::{Failure, CERTIFIED, NOT_APPLICABLE, NOT_CERTIFIED};
use crate::render::{cell, to_value, Sink};

/// Restarts or bootstrap members evaluated between two flushes of the stream.
const STREAM_CHUNK: usize = 64;
/// Largest reproduction residue accepted by `lhs-verify`.
const REPRODUCTION_TOL: f64 = 1e-10;

pub fn read_state(path: &Path) -> Result<DensityMatrix, Failure> {
    Ok(state_from_str(&fs::read_to_string(path)?)?)
}

fn read_counts(path: &Path) -> Result<CountsRecord, Failure> {
    let v: Value = serde_json::from_str(&fs::read_to_string(path)?).map_err(|e| Error::Malformed(e.to_string()))?;
    Ok(CountsRecord::from_json(&v)?)
}

pub fn epsilon_arg(eps: f64) -> Result<f64, Failure> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Failure::Usage(format!("--epsilon must lie in [0, 1], got {eps}")));
    }
    Ok(eps)
}

fn xyz(prefix: &str) -> [String; 3] {
    ["x", "y", "z"].map(|c| format!("{prefix}_{c}"))
}

fn vec_cells(v: &[f64; 3]) -> Vec<String> {
    v.iter().map(|&x| cell(x)).collect()
}

fn not_applicable(sink: &mut Sink, kind: ConditionKind, epsilon: f64) -> Result<u8, Failure> {
    eprintln!("steercert: {}", Error::NotApplicable(4.0 * epsilon));
    sink.json(json!({
        "status": "not_applicable",
        "kind": kind,
        "epsilon": epsilon,
        "effective_epsilon": 4.0 * epsilon,
    }))?;
    Ok(NOT_APPLICABLE)
}

const VERDICT_HEADER: [&str; 9] = [
    "kind",
    "epsilon",
    "effective_epsilon",
    "objective_max",
    "argmax_x",
    "argmax_y",
    "argmax_z",
    "certified",
    "trivially_nonsteerable",
];

fn verdict_row(v: &Verdict) -> Vec<String> {
    let mut row = vec![cell(to_value(&v.kind)), cell(v.epsilon), cell(v.effective_epsilon), cell(v.objective_max)];
    row.extend(vec_cells(v.argmax.as_array()));
    row.push(cell(v.certified));
    row.push(cell(v.trivially_nonsteerable));
    row
}

pub fn certify(args: &CertifyArgs, sink: &mut Sink) -> Result<u8, Failure> {
    let eps = epsilon_arg(args.epsilon)?;
    let kind = ConditionKind::from(args.kind);
    let rho = read_state(&args.state)?;
    let opts = MaximizeOptions::with_grid_points(args.grid_points);
    let v = match certify_state(&rho, eps, kind, &opts) {
        Err(Error::NotApplicable(_)) => return not_applicable(sink, kind, eps),
        r => r?,
    };
    sink.json(to_value(&v))?;
    sink.csv_row(&VERDICT_HEADER, verdict_row(&v))?;
    Ok(if v.trivially_nonsteerable {
        NOT_APPLICABLE
    } else if v.certified {
        CERTIFIED
    } else {
        NOT_CERTIFIED
    })
}

pub fn canonicalize_cmd(args: &StateArgs, sink: &mut Sink) -> Result<u8, Failure> {
    let r = canonicalize(&read_state(&args.state)?)?;
    sink.json(to_value(&r))?;
    let [ax, ay, az] = xyz("a");
    let header = [ax.as_str(), &ay, &az, "t_1", "t_2", "t_3", "trivially_nonsteerable", "filter_applied"];
    let mut row = vec_cells(&r.canonical.a);
    row.extend(vec_cells(&r.canonical.t));
    row.push(cell(r.trivially_nonsteerable));
    row.push(cell(r.filter_applied));
    sink.csv_row(&header, row)?;
    Ok(if r.trivially_nonsteerable { NOT_APPLICABLE } else { CERTIFIED })
}

struct DirectionCheck {
    x: MeasurementDirection,
    domination: DominationReport,
    /// `None` when the outcome flip could not be constructed.
    residue: Option<f64>,
}

impl DirectionCheck {
    fn passed(&self) -> bool {
        self.domination.dominated && self.residue.is_some_and(|r| r <= REPRODUCTION_TOL)
    }
}

fn check_direction(
    c: &steercert::canonical::CanonicalState,
    eps: f64,
    x: MeasurementDirection,
) -> Result<DirectionCheck, Failure> {
    let domination = domination_check(c, eps, &x)?;
    let residue = if eps == 0.0 {
        // Everything is announced as null; both assemblages are (I/2, 0, 0).
        Some(0.0)
    } else {
        match reproduce_assemblage(&lhs_assemblage(c, eps, &x)?, &quantum_assemblage(c, eps, &x)?) {
            Ok(r) => Some(r.residue.max(r.trace_residue)),
            Err(Error::DominationFailure(_)) | Err(Error::FlipPrecondition(_)) => None,
            Err(e) => return Err(e.into()),
        }
    };
    Ok(DirectionCheck { x, domination, residue })
}

fn monte_carlo_summary(
    c: &steercert::canonical::CanonicalState,
    eps: f64,
    x: &MeasurementDirection,
    n_samples: usize,
    seed: u64,
) -> Result<Value, Failure> {
    let exact = lhs_assemblage(c, eps, x)?;
    let mc = lhs_assemblage_mc(c, eps, x, n_samples, seed)?;
    let mut max_td = 0.0f64;
    let mut max_z = 0.0f64;
    for o in [Outcome::Plus, Outcome::Minus, Outcome::Null] {
        let est = &mc.estimate.entry(o).matrix;
        let ex = &exact.entry(o).matrix;
        max_td = max_td.max(trace_distance(est, ex));
        let se = mc.std_err_of(o);
        for i in 0..2 {
            for j in 0..2 {
                let d = est[(i, j)] - ex[(i, j)];
                for (diff, err) in [(d.re, se[(i, j)].re), (d.im, se[(i, j)].im)] {
                    if err > 0.0 {
                        max_z = max_z.max(diff.abs() / err);
                    }
                }
            }
        }
    }
    Ok(json!({"n_samples": n_samples, "max_trace_distance": max_td, "max_std_errors": max_z}))
}

pub fn lhs_verify(args: &LhsVerifyArgs, seed: u64, sink: &mut Sink) -> Result<u8, Failure> {
    let eps = epsilon_arg(args.epsilon)?;
    let r = canonicalize(&read_state(&args.state)?)?;
    if r.trivially_nonsteerable {
        sink.json(json!({"epsilon": eps, "trivially_nonsteerable": true}))?;
        return Ok(NOT_APPLICABLE);
    }
    let c = r.canonical;
    let (objective_max, argmax) = maximize_objective(&c, eps, &MaximizeOptions::with_grid_points(args.grid_points))?;
    let mut rng = stream_rng(seed, 0);
    let mut dirs = vec![argmax];
    dirs.extend((0..args.directions).map(|_| random_direction(&mut rng)));
    let checks: Vec<DirectionCheck> =
        dirs.into_par_iter().map(|x| check_direction(&c, eps, x)).collect::<Result<_, _>>()?;

    let [x, y, z] = xyz("x");
    let header = ["index", x.as_str(), &y, &z, "lambda_lhs", "lambda_quantum", "gap", "dominated", "residue"];
    let mut records = Vec::with_capacity(checks.len());
    for (i, ch) in checks.iter().enumerate() {
        let d = &ch.domination;
        records.push(json!({
            "index": i,
            "x_hat": ch.x,
            "lambda_lhs": d.lambda_lhs,
            "lambda_quantum": d.lambda_quantum,
            "gap": d.gap,
            "traces_match": d.traces_match,
            "dominated": d.dominated,
            "residue": ch.residue,
        }));
        let mut row = vec![cell(i as u64)];
        row.extend(vec_cells(ch.x.as_array()));
        row.extend([cell(d.lambda_lhs), cell(d.lambda_quantum), cell(d.gap), cell(d.dominated), cell(ch.residue)]);
        sink.csv_row(&header, row)?;
    }

    let verified = checks.iter().all(DirectionCheck::passed);
    let mut report = json!({
        "epsilon": eps,
        "canonical": c,
        "objective_max": objective_max,
        "argmax": argmax,
        "certified": objective_max <= 1.0 + CERTIFY_TOL,
        "n_directions": checks.len(),
        "n_dominated": checks.iter().filter(|ch| ch.domination.dominated).count(),
        "n_reproduced": checks.iter().filter(|ch| ch.passed()).count(),
        "min_gap": checks.iter().map(|ch| ch.domination.gap).fold(f64::INFINITY, f64::min),
        "max_residue": checks.iter().filter_map(|ch| ch.residue).fold(0.0, f64::max),
        "verified": verified,
        "directions": records,
    });
    if let Some(n) = args.n_samples {
        report["monte_carlo"] = monte_carlo_summary(&c, eps, &argmax, n, seed)?;
    }
    sink.json(report)?;
    Ok(if verified { CERTIFIED } else { NOT_CERTIFIED })
}

pub fn threshold(args: &ThresholdArgs, sink: &mut Sink) -> Result<u8, Failure> {
    let r = canonicalize(&read_state(&args.state)?)?;
    if r.trivially_nonsteerable {
        sink.json(json!({"epsilon_0": 1.0, "trivially_nonsteerable": true}))?;
        return Ok(NOT_APPLICABLE);
    }
    let t = epsilon_threshold(&r.canonical, &MaximizeOptions::with_grid_points(args.grid_points))?;
    sink.json(to_value(&t))?;
    let [x, y, z] = xyz("x0");
    let header = ["epsilon_0", x.as_str(), &y, &z, "numerator", "denominator", "always_nonsteerable"];
    let mut row = vec![cell(t.epsilon_0)];
    row.extend(vec_cells(t.argmax_x0.as_array()));
    row.extend([cell(t.numerator), cell(t.denominator), cell(t.always_nonsteerable)]);
    sink.csv_row(&header, row)?;
    Ok(match t.epsilon_0 {
        _ if t.always_nonsteerable => NOT_APPLICABLE,
        Some(_) => CERTIFIED,
        None => NOT_CERTIFIED,
    })
}

pub fn search(args: &SearchArgs, seed: u64, sink: &mut Sink) -> Result<u8, Failure> {
    if args.budget == 0 {
        return Err(Failure::Usage("--budget must be at least 1".into()));
    }
    let opts = SearchOptions { grid_points: args.grid_points, ..SearchOptions::new(seed, args.budget) };
    let schedule = restart_schedule(&opts);
    let [ax, ay, az] = xyz("a");
    let header = ["restart", "evaluations", "best_value", ax.as_str(), &ay, &az, "t_1", "t_2", "t_3", "hits"];
    let mut results = Vec::with_capacity(schedule.len());
    for (chunk_index, chunk) in schedule.chunks(STREAM_CHUNK).enumerate() {
        let base = chunk_index * STREAM_CHUNK;
        let batch: Vec<_> = chunk
            .par_iter()
            .enumerate()
            .map(|(i, &n)| search_restart(&opts, base + i, n))
            .collect::<Result<_, _>>()?;
        for r in &batch {
            let mut line = json!({"type": "restart"});
            line.as_object_mut().expect("object").extend(to_value(r).as_object().cloned().unwrap_or_default());
            sink.json(line)?;
            let mut row = vec![cell(r.restart as u64), cell(r.evaluations as u64), cell(r.best_value)];
            row.extend(vec_cells(&r.best.a));
            row.extend(vec_cells(&r.best.t));
            row.push(cell(r.hits.len() as u64));
            sink.csv_row(&header, row)?;
        }
        sink.flush()?;
        results.extend(batch);
    }
    let report = merge_restarts(&opts, results);
    let mut line = json!({"type": "summary"});
    line.as_object_mut().expect("object").extend(to_value(&report).as_object().cloned().unwrap_or_default());
    sink.json(line)?;
    Ok(if report.hits.is_empty() { NOT_CERTIFIED } else { CERTIFIED })
}

pub fn bootstrap(args: &BootstrapArgs, seed: u64, sink: &mut Sink) -> Result<u8, Failure> {
    let eps = epsilon_arg(args.epsilon)?;
    let kind = ConditionKind::from(args.kind);
    if args.n_boot == 0 {
        return Err(Failure::Usage("--n-boot must be at least 1".into()));
    }
    if args.n_per_setting == 0 {
        return Err(Failure::Usage("--n-per-setting must be at least 1".into()));
    }
    let (rho_hat, eps_nominal) = match (&args.state, &args.counts) {
        (Some(p), _) => (read_state(p)?, eps),
        (None, Some(p)) => {
            let record = read_counts(p)?;
            (reconstruct(&record)?, record.epsilon_nominal)
        }
        (None, None) => return Err(Failure::Usage("one of --state or --counts is required".into())),
    };
    if kind == ConditionKind::Povm && 4.0 * eps > 1.0 {
        return not_applicable(sink, kind, eps);
    }
    let opts = MaximizeOptions::with_grid_points(args.grid_points);
    let header = ["index", "objective", "certified", "trivially_nonsteerable"];
    let mut members: Vec<MemberResult> = Vec::with_capacity(args.n_boot);
    let indices: Vec<usize> = (0..args.n_boot).collect();
    for chunk in indices.chunks(STREAM_CHUNK) {
        let batch: Vec<MemberResult> = chunk
            .par_iter()
            .map(|&k| {
                let rho = bootstrap_member(&rho_hat, eps_nominal, args.n_per_setting, seed, k)?;
                Ok(MemberResult::from_verdict(k, &certify_state(&rho, eps, kind, &opts)?))
            })
            .collect::<Result<_, Error>>()?;
        for m in &batch {
            let mut line = json!({"type": "member"});
            line.as_object_mut().expect("object").extend(to_value(m).as_object().cloned().unwrap_or_default());
            sink.json(line)?;
            sink.csv_row(
                &header,
                vec![cell(m.index as u64), cell(m.objective), cell(m.certified), cell(m.trivially_nonsteerable)],
            )?;
        }
        sink.flush()?;
        members.extend(batch);
    }
    let report = summarize_members(members, eps, kind)?;
    sink.json(json!({
        "type": "summary",
        "n_states": report.n_states,
        "condition_kind": report.condition_kind,
        "epsilon_worst": report.epsilon_worst,
        "n_per_setting": args.n_per_setting,
        "seed": seed,
        "mean": report.mean,
        "std": report.std,
        "min": report.min,
        "max": report.max,
        "certified_fraction": report.certified_fraction,
        "certified": report.mean <= 1.0 + CERTIFY_TOL,
    }))?;
    Ok(if report.mean <= 1.0 + CERTIFY_TOL { CERTIFIED } else { NOT_CERTIFIED })
}
