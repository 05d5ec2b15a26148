//! Synthetic two-qubit Pauli tomography and the bootstrap error analysis of
//! the certification objective.
//!
//! Each of the nine settings measures Pauli axis `i` on Alice and `j` on Bob;
//! its four outcome cells are ordered `(+,+), (+,-), (-,+), (-,-)`.

use num_complex::Complex64;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::canonical::canonicalize;
use crate::error::{Error, Result};
use crate::qstate::{compose_matrix, hermitian_eigensystem, pauli_decompose, ComplexMatrix, DensityMatrix, PauliForm, NOISY_TOL};
use crate::sampling::stream_rng;
use crate::steercrit::{certify, ConditionKind, MaximizeOptions, Verdict};

const AXES: [char; 3] = ['x', 'y', 'z'];
/// Outcome signs `(s_A, s_B)` of the four cells of a setting.
const SIGNS: [(f64, f64); 4] = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];

/// The nine `(Alice axis, Bob axis)` settings in row-major order.
pub fn pauli_settings() -> Vec<(usize, usize)> {
    (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).collect()
}

fn setting_label((i, j): (usize, usize)) -> String {
    format!("{}{}", AXES[i], AXES[j])
}

fn parse_setting(label: &str) -> Result<(usize, usize)> {
    let axis = |c: char| AXES.iter().position(|&a| a == c);
    let mut chars = label.chars();
    match (chars.next().and_then(axis), chars.next().and_then(axis), chars.next()) {
        (Some(i), Some(j), None) => Ok((i, j)),
        _ => Err(Error::Malformed(format!("unknown Pauli setting {label:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountsRecord {
    pub settings: Vec<(usize, usize)>,
    pub counts: Vec<[u64; 4]>,
    pub nominal_per_setting: u64,
    pub epsilon_nominal: f64,
}

#[derive(Serialize, Deserialize)]
struct CountsDoc {
    settings: Vec<String>,
    counts: Map<String, Value>,
    n: u64,
    #[serde(default)]
    epsilon_nominal: f64,
}

impl CountsRecord {
    /// `{"settings": ["xx", ...], "counts": {"xx": [4], ...}, "n": int, "epsilon_nominal": real}`.
    pub fn to_json(&self) -> Value {
        let mut counts = Map::new();
        for (s, c) in self.settings.iter().zip(&self.counts) {
            counts.insert(setting_label(*s), json!(c));
        }
        json!({
            "settings": self.settings.iter().map(|s| setting_label(*s)).collect::<Vec<_>>(),
            "counts": counts,
            "n": self.nominal_per_setting,
            "epsilon_nominal": self.epsilon_nominal,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let doc: CountsDoc = serde_json::from_value(v.clone()).map_err(|e| Error::Malformed(e.to_string()))?;
        let mut settings = Vec::with_capacity(doc.settings.len());
        let mut counts = Vec::with_capacity(doc.settings.len());
        for label in &doc.settings {
            settings.push(parse_setting(label)?);
            let cells = doc
                .counts
                .get(label)
                .ok_or_else(|| Error::Malformed(format!("missing counts for setting {label:?}")))?;
            let cells: [u64; 4] =
                serde_json::from_value(cells.clone()).map_err(|e| Error::Malformed(format!("{label}: {e}")))?;
            counts.push(cells);
        }
        Ok(Self { settings, counts, nominal_per_setting: doc.n, epsilon_nominal: doc.epsilon_nominal })
    }
}

/// Born-rule probabilities of the four cells of every setting.
pub fn outcome_probabilities(rho: &DensityMatrix) -> Result<Vec<[f64; 4]>> {
    let p = pauli_decompose(rho)?;
    Ok(pauli_settings()
        .into_iter()
        .map(|(i, j)| SIGNS.map(|(sa, sb)| (0.25 * (1.0 + sa * p.a[i] + sb * p.b[j] + sa * sb * p.t[i][j])).max(0.0)))
        .collect())
}

fn draw_counts(probs: &[[f64; 4]], n: u64, seed: u64, stream: u64) -> Vec<[u64; 4]> {
    let mut rng = stream_rng(seed, stream);
    probs
        .iter()
        .map(|cell| {
            cell.map(|p| {
                let mean = n as f64 * p;
                if mean > 0.0 {
                    Poisson::new(mean).expect("positive finite mean").sample(&mut rng) as u64
                } else {
                    0
                }
            })
        })
        .collect()
}

fn simulate_stream(rho: &DensityMatrix, epsilon: f64, n: u64, seed: u64, stream: u64) -> Result<CountsRecord> {
    if n == 0 {
        return Err(Error::InvalidParameter("n_per_setting must be at least 1".into()));
    }
    let probs = outcome_probabilities(rho)?;
    Ok(CountsRecord {
        settings: pauli_settings(),
        counts: draw_counts(&probs, n, seed, stream),
        nominal_per_setting: n,
        epsilon_nominal: epsilon,
    })
}

/// Poissonian counts with mean `n_per_setting` times the Born probability in every cell.
pub fn simulate_counts(rho: &DensityMatrix, epsilon: f64, n_per_setting: u64, seed: u64) -> Result<CountsRecord> {
    simulate_stream(rho, epsilon, n_per_setting, seed, 0)
}

/// Closest unit-trace positive semidefinite matrix (in Frobenius norm) to a
/// unit-trace Hermitian matrix: negative eigenvalues are zeroed and their
/// mass is spread uniformly over the rest, repeating while that creates new
/// negative eigenvalues.
pub fn project_to_state(m: &ComplexMatrix) -> Result<DensityMatrix> {
    let es = hermitian_eigensystem(m)?;
    let mut lambda = es.eigenvalues.clone();
    let d = lambda.len();
    let mut deficit = 0.0;
    let mut i = d;
    while i > 0 {
        let remaining = i as f64;
        if lambda[i - 1] + deficit / remaining < 0.0 {
            deficit += lambda[i - 1];
            lambda[i - 1] = 0.0;
            i -= 1;
        } else {
            let share = deficit / remaining;
            for l in &mut lambda[..i] {
                *l += share;
            }
            break;
        }
    }
    let v = &es.eigenvectors;
    let mut out = ComplexMatrix::zeros(d);
    for (k, &l) in lambda.iter().enumerate() {
        if l == 0.0 {
            continue;
        }
        for r in 0..d {
            for c in 0..d {
                out[(r, c)] += v[(r, k)] * v[(c, k)].conj() * Complex64::new(l, 0.0);
            }
        }
    }
    DensityMatrix::with_tolerance(out.hermitian_part(), NOISY_TOL)
}

/// Linear inversion of cell frequencies with per-setting weights (total counts).
/// Local Bloch components pool every setting that measures the axis.
fn invert(settings: &[(usize, usize)], freqs: &[[f64; 4]], weights: &[f64]) -> PauliForm {
    let mut p = PauliForm::zero();
    let (mut a_num, mut a_den, mut b_num, mut b_den) = ([0.0; 3], [0.0; 3], [0.0; 3], [0.0; 3]);
    for ((&(i, j), f), &w) in settings.iter().zip(freqs).zip(weights) {
        let ea = f[0] + f[1] - f[2] - f[3];
        let eb = f[0] - f[1] + f[2] - f[3];
        p.t[i][j] = f[0] - f[1] - f[2] + f[3];
        a_num[i] += w * ea;
        a_den[i] += w;
        b_num[j] += w * eb;
        b_den[j] += w;
    }
    for k in 0..3 {
        p.a[k] = a_num[k] / a_den[k];
        p.b[k] = b_num[k] / b_den[k];
    }
    p
}

fn check_complete(settings: &[(usize, usize)]) -> Result<()> {
    for s in pauli_settings() {
        if !settings.contains(&s) {
            return Err(Error::Malformed(format!("setting {} is missing", setting_label(s))));
        }
    }
    Ok(())
}

/// State from exact (or empirical) cell probabilities of the nine settings in
/// [`pauli_settings`] order, without projection.
pub fn invert_probabilities(probs: &[[f64; 4]]) -> Result<ComplexMatrix> {
    if probs.len() != 9 {
        return Err(Error::Dimension { expected: 9, got: probs.len() });
    }
    Ok(compose_matrix(&invert(&pauli_settings(), probs, &[1.0; 9])))
}

/// Linear inversion followed by projection onto the state space.
pub fn reconstruct(record: &CountsRecord) -> Result<DensityMatrix> {
    if record.settings.len() != record.counts.len() {
        return Err(Error::Malformed("settings and counts differ in length".into()));
    }
    check_complete(&record.settings)?;
    let mut freqs = Vec::with_capacity(record.counts.len());
    let mut weights = Vec::with_capacity(record.counts.len());
    for (s, c) in record.settings.iter().zip(&record.counts) {
        let total: u64 = c.iter().sum();
        if total == 0 {
            return Err(Error::EmptySetting(setting_label(*s)));
        }
        let n = total as f64;
        freqs.push(c.map(|k| k as f64 / n));
        weights.push(n);
    }
    project_to_state(&compose_matrix(&invert(&record.settings, &freqs, &weights)))
}

/// Parametric bootstrap: member `k` is reconstructed from counts drawn on
/// stream `k + 1` of `seed`.
pub fn bootstrap_ensemble(
    rho_hat: &DensityMatrix,
    epsilon_nominal: f64,
    n_boot: usize,
    n_per_setting: u64,
    seed: u64,
) -> Result<Vec<DensityMatrix>> {
    if n_boot == 0 {
        return Err(Error::InvalidParameter("n_boot must be at least 1".into()));
    }
    (0..n_boot).into_par_iter().map(|k| bootstrap_member(rho_hat, epsilon_nominal, n_per_setting, seed, k)).collect()
}

/// Member `index` of [`bootstrap_ensemble`] on its own.
pub fn bootstrap_member(
    rho_hat: &DensityMatrix,
    epsilon_nominal: f64,
    n_per_setting: u64,
    seed: u64,
    index: usize,
) -> Result<DensityMatrix> {
    reconstruct(&simulate_stream(rho_hat, epsilon_nominal, n_per_setting, seed, index as u64 + 1)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberResult {
    pub index: usize,
    pub objective: f64,
    pub certified: bool,
    pub trivially_nonsteerable: bool,
}

impl MemberResult {
    pub fn from_verdict(index: usize, v: &Verdict) -> Self {
        Self { index, objective: v.objective_max, certified: v.certified, trivially_nonsteerable: v.trivially_nonsteerable }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleReport {
    pub n_states: usize,
    pub condition_kind: ConditionKind,
    pub epsilon_worst: f64,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub certified_fraction: f64,
    pub values: Vec<f64>,
    pub members: Vec<MemberResult>,
}

/// Canonicalizes `rho` and certifies it; a pure Bob marginal gives the trivial verdict.
pub fn certify_state(rho: &DensityMatrix, epsilon: f64, kind: ConditionKind, opts: &MaximizeOptions) -> Result<Verdict> {
    let c = canonicalize(rho)?;
    if c.trivially_nonsteerable {
        return Ok(Verdict::trivial(kind, epsilon));
    }
    certify(&c.canonical, epsilon, kind, opts)
}

/// Canonicalizes and certifies every member at `epsilon_worst`; the summary
/// statistics use the population standard deviation.
pub fn analyze_ensemble(
    states: &[DensityMatrix],
    epsilon_worst: f64,
    kind: ConditionKind,
    opts: &MaximizeOptions,
) -> Result<EnsembleReport> {
    if states.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    crate::steercrit::check_epsilon(epsilon_worst)?;
    let verdicts: Vec<Verdict> =
        states.par_iter().map(|rho| certify_state(rho, epsilon_worst, kind, opts)).collect::<Result<_>>()?;
    let members = verdicts.iter().enumerate().map(|(index, v)| MemberResult::from_verdict(index, v)).collect();
    summarize_members(members, epsilon_worst, kind)
}

/// Summary statistics over already certified members, in member order.
pub fn summarize_members(members: Vec<MemberResult>, epsilon_worst: f64, kind: ConditionKind) -> Result<EnsembleReport> {
    if members.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let values: Vec<f64> = members.iter().map(|m| m.objective).collect();
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let std = (sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
    let certified = members.iter().filter(|m| m.certified).count();
    Ok(EnsembleReport {
        n_states: members.len(),
        condition_kind: kind,
        epsilon_worst,
        // Rounding can push the mean of identical values a hair outside [min, max].
        mean: mean.clamp(sorted[0], sorted[sorted.len() - 1]),
        std,
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        certified_fraction: certified as f64 / n,
        values,
        members,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{physicality_check, werner};

    #[test]
    fn counts_are_reproducible() {
        let rho = werner(0.6).unwrap();
        let a = simulate_counts(&rho, 0.5, 1000, 3).unwrap();
        let b = simulate_counts(&rho, 0.5, 1000, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts.len(), 9);
        assert_ne!(a, simulate_counts(&rho, 0.5, 1000, 4).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let rho = werner(0.6).unwrap();
        let a = simulate_counts(&rho, 0.5, 1000, 3).unwrap();
        assert_eq!(CountsRecord::from_json(&a.to_json()).unwrap(), a);
        assert!(CountsRecord::from_json(&json!({"settings": ["xq"], "counts": {}, "n": 1})).is_err());
    }

    #[test]
    fn uniform_counts_give_maximally_mixed() {
        let record = CountsRecord {
            settings: pauli_settings(),
            counts: vec![[25; 4]; 9],
            nominal_per_setting: 100,
            epsilon_nominal: 1.0,
        };
        let rho = reconstruct(&record).unwrap();
        assert!(rho.matrix().max_abs_diff(&ComplexMatrix::identity(4).scale(0.25)) < 1e-15);
    }

    #[test]
    fn empty_setting_is_an_error() {
        let mut counts = vec![[25; 4]; 9];
        counts[4] = [0; 4];
        let record = CountsRecord { settings: pauli_settings(), counts, nominal_per_setting: 100, epsilon_nominal: 1.0 };
        assert!(matches!(reconstruct(&record), Err(Error::EmptySetting(s)) if s == "yy"));
    }

    #[test]
    fn exact_probabilities_invert_exactly() {
        let c = crate::canonical::CanonicalState::new([0.1, -0.2, 0.3], [0.5, -0.3, 0.2]).unwrap();
        let rho = c.density_matrix().unwrap();
        let back = invert_probabilities(&outcome_probabilities(&rho).unwrap()).unwrap();
        assert!(back.max_abs_diff(rho.matrix()) < 1e-12);
    }

    #[test]
    fn clipping_oracle() {
        // diag(0.62, 0.3, 0.1, -0.02) in a rotated basis: the projection is
        // diag(0.62 - 0.02/3, 0.3 - 0.02/3, 0.1 - 0.02/3, 0) in the same basis.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut u = ComplexMatrix::identity(4);
        u[(0, 0)] = Complex64::new(h, 0.0);
        u[(0, 3)] = Complex64::new(0.0, h);
        u[(3, 0)] = Complex64::new(0.0, h);
        u[(3, 3)] = Complex64::new(h, 0.0);
        let d = ComplexMatrix::from_real_diagonal(&[0.62, 0.3, 0.1, -0.02]);
        let m = &(&u * &d) * &u.adjoint();
        let s = 0.02 / 3.0;
        let expected = &(&u * &ComplexMatrix::from_real_diagonal(&[0.62 - s, 0.3 - s, 0.1 - s, 0.0])) * &u.adjoint();
        let p = project_to_state(&m).unwrap();
        assert!(p.matrix().max_abs_diff(&expected) < 1e-14);
        let r = physicality_check(p.matrix(), 1e-12);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn cascading_clip() {
        // Redistributing the first deficit makes the next eigenvalue negative too.
        let m = ComplexMatrix::from_real_diagonal(&[0.9, 0.2, -0.04, -0.06]);
        let p = project_to_state(&m).unwrap();
        let es = hermitian_eigensystem(p.matrix()).unwrap();
        let expect = [0.85, 0.15, 0.0, 0.0];
        for (l, e) in es.eigenvalues.iter().zip(expect) {
            assert!((l - e).abs() < 1e-12, "{:?}", es.eigenvalues);
        }
    }

    #[test]
    fn identical_ensemble_has_zero_spread() {
        let states = vec![werner(0.6).unwrap(); 5];
        let r = analyze_ensemble(&states, 0.5, ConditionKind::Projective, &MaximizeOptions::default()).unwrap();
        assert_eq!(r.std, 0.0);
        assert_eq!(r.n_states, 5);
        assert!((r.mean - 0.85).abs() < 1e-12);
        assert_eq!(r.certified_fraction, 1.0);
        assert!(analyze_ensemble(&[], 0.5, ConditionKind::Projective, &MaximizeOptions::default()).is_err());
    }

    #[test]
    fn bootstrap_is_deterministic_and_physical() {
        let rho = werner(0.8).unwrap();
        let a = bootstrap_ensemble(&rho, 0.1, 6, 2000, 17).unwrap();
        let b = bootstrap_ensemble(&rho, 0.1, 6, 2000, 17).unwrap();
        assert_eq!(a, b);
        for s in &a {
            assert!(physicality_check(s.matrix(), 1e-8).pass);
        }
    }
}
