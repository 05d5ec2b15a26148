//! Outcome flipping: relabelling announced outcomes of a dominating
//! assemblage so that it reproduces a target assemblage exactly.
//!
//! Both assemblages are conditioned on an announcement (divided by `eps`) so
//! that `sigma_+ + sigma_- = I/2`. With `p` the weight of `+1`, `alpha_lhs`
//! and `alpha` the normalized top eigenvalues of the model and target `+1`
//! operators, Alice keeps a `+1` with probability `f` and turns a `-1` into
//! `+1` with probability `g`:
//!
//! ```text
//! C = (p alpha_lhs - 1/2)/(1 - p)
//! f = (alpha + C)/(alpha_lhs + C)
//! g = p (1 - f)/(1 - p)
//! ```

use num_complex::Complex64;
use serde::Serialize;

use super::Assemblage;
use crate::error::{Error, Result};
use crate::qstate::{hermitian_eigensystem, ComplexMatrix, SubnormalizedOperator};

/// Slack on the flip preconditions, for inputs computed in floating point.
const PRECONDITION_TOL: f64 = 1e-12;
/// Probabilities this close to 0 or 1 leave nothing to flip.
const DEGENERATE_WEIGHT: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlipSolution {
    pub p_plus: f64,
    pub alpha_plus_lhs: f64,
    pub alpha_plus_target: f64,
    pub alpha_minus_lhs: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub f: f64,
    pub g: f64,
}

impl FlipSolution {
    /// Residue of the diagonal identity `f sigma_+^lhs + g sigma_-^lhs = sigma_+`
    /// in the common eigenbasis, both slots.
    pub fn reconstruction_residue(&self) -> f64 {
        let p = self.p_plus;
        let q = 1.0 - p;
        let top = self.f * p * self.alpha_plus_lhs + self.g * q * self.alpha_minus_lhs - p * self.alpha_plus_target;
        let bottom = self.f * p * (1.0 - self.alpha_plus_lhs) + self.g * q * (1.0 - self.alpha_minus_lhs)
            - p * (1.0 - self.alpha_plus_target);
        top.abs().max(bottom.abs())
    }
}

pub fn flip_solution(p_plus: f64, alpha_plus_lhs: f64, alpha_plus_target: f64) -> Result<FlipSolution> {
    let fail = |m: String| Err(Error::FlipPrecondition(m));
    if !(p_plus > 0.0 && p_plus < 1.0) {
        return fail(format!("p_plus must lie in (0, 1), got {p_plus}"));
    }
    if !(alpha_plus_lhs <= 1.0 + PRECONDITION_TOL) {
        return fail(format!("alpha_plus_lhs must be at most 1, got {alpha_plus_lhs}"));
    }
    if !(alpha_plus_target >= 0.5 - PRECONDITION_TOL) {
        return fail(format!("alpha_plus_target must be at least 1/2, got {alpha_plus_target}"));
    }
    if !(alpha_plus_target <= alpha_plus_lhs + PRECONDITION_TOL) {
        return fail(format!(
            "alpha_plus_target {alpha_plus_target} exceeds alpha_plus_lhs {alpha_plus_lhs}"
        ));
    }
    if !(p_plus * alpha_plus_lhs <= 0.5 + PRECONDITION_TOL) {
        return fail(format!("p_plus * alpha_plus_lhs = {} exceeds 1/2", p_plus * alpha_plus_lhs));
    }
    let q = 1.0 - p_plus;
    let c = (p_plus * alpha_plus_lhs - 0.5) / q;
    let alpha_minus_lhs = (0.5 - p_plus * alpha_plus_lhs) / q;
    // alpha_lhs + C = (alpha_lhs - 1/2)/(1 - p) vanishes only when both alphas are 1/2.
    let f = if alpha_plus_lhs - 0.5 <= PRECONDITION_TOL {
        1.0
    } else {
        ((alpha_plus_target + c) / (alpha_plus_lhs + c)).clamp(0.0, 1.0)
    };
    let g = (p_plus * (1.0 - f) / q).clamp(0.0, 1.0);
    Ok(FlipSolution { p_plus, alpha_plus_lhs, alpha_plus_target, alpha_minus_lhs, c, f, g })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReproductionReport {
    pub flip: FlipSolution,
    /// Largest elementwise difference between reproduced and target `±1` entries.
    pub residue: f64,
    /// Largest difference between reproduced and target `±1` traces.
    pub trace_residue: f64,
}

fn expectation(m: &ComplexMatrix, v: &[Complex64; 2]) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            acc += v[i].conj() * m[(i, j)] * v[j];
        }
    }
    acc.re
}

/// Flips the announced outcomes of `lhs` to reproduce `target`.
pub fn reproduce_assemblage(lhs: &Assemblage, target: &Assemblage) -> Result<ReproductionReport> {
    if lhs.x_hat != target.x_hat || lhs.epsilon != target.epsilon {
        return Err(Error::InvalidParameter("assemblages belong to different directions or efficiencies".into()));
    }
    let eps = lhs.epsilon;
    if eps <= 0.0 {
        return Err(Error::InvalidParameter("no announced outcomes at zero efficiency".into()));
    }
    let plus_lhs = lhs.plus.matrix.scale(1.0 / eps);
    let plus_target = target.plus.matrix.scale(1.0 / eps);
    let p = plus_target.trace().re;

    // Common eigenbasis: the top eigenvector of the model's +1 operator.
    let es = hermitian_eigensystem(&plus_lhs)?;
    let v = [es.eigenvectors[(0, 0)], es.eigenvectors[(1, 0)]];

    let flip = if p <= DEGENERATE_WEIGHT || p >= 1.0 - DEGENERATE_WEIGHT {
        FlipSolution {
            p_plus: p,
            alpha_plus_lhs: 0.5,
            alpha_plus_target: 0.5,
            alpha_minus_lhs: 0.5,
            c: 0.0,
            f: 1.0,
            g: 0.0,
        }
    } else {
        let alpha_lhs = expectation(&plus_lhs, &v) / p;
        let alpha = expectation(&plus_target, &v) / p;
        if alpha > alpha_lhs + PRECONDITION_TOL {
            return Err(Error::DominationFailure(alpha - alpha_lhs));
        }
        flip_solution(p, alpha_lhs.min(1.0), alpha)?
    };

    let (plus, minus) = flipped_entries(lhs, &flip);
    let residue = plus.matrix.max_abs_diff(&target.plus.matrix).max(minus.matrix.max_abs_diff(&target.minus.matrix));
    let trace_residue = (plus.weight - target.plus.weight).abs().max((minus.weight - target.minus.weight).abs());
    Ok(ReproductionReport { flip, residue, trace_residue })
}

/// Reproduction over several directions, one report per pair.
pub fn reproduce_batch(pairs: &[(Assemblage, Assemblage)]) -> Result<Vec<ReproductionReport>> {
    pairs.iter().map(|(l, t)| reproduce_assemblage(l, t)).collect()
}

/// The reproduced assemblage, for inspection.
pub fn flipped_entries(lhs: &Assemblage, flip: &FlipSolution) -> (SubnormalizedOperator, SubnormalizedOperator) {
    let plus = &lhs.plus.matrix.scale(flip.f) + &lhs.minus.matrix.scale(flip.g);
    let minus = &lhs.plus.matrix.scale(1.0 - flip.f) + &lhs.minus.matrix.scale(1.0 - flip.g);
    (SubnormalizedOperator::from_matrix(plus), SubnormalizedOperator::from_matrix(minus))
}
