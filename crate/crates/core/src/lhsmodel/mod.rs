//! Explicit local-hidden-state model for lossy canonical states.
//!
//! Bob's hidden state is a pure qubit state drawn uniformly from the Bloch
//! sphere. For a measurement direction `x` Alice answers according to the
//! coordinate `z` of the hidden state along the steered-state axis
//! `s = T x / ||T x||` (see [`ResponseRegions`]). The resulting assemblage is
//! compared with the quantum one by eigenvalue domination, and outcome
//! flipping turns a dominating assemblage into the quantum one exactly.

mod flip;
mod monte_carlo;
mod regions;

use serde_json::{json, Value};

pub use flip::{flip_solution, flipped_entries, reproduce_assemblage, reproduce_batch, FlipSolution, ReproductionReport};
pub use monte_carlo::{lhs_assemblage_mc, McAssemblage, MC_CHUNK};
pub use regions::{response_regions, steering_axis, Outcome, ResponseRegions, ZInterval};

use crate::canonical::CanonicalState;
use crate::error::Result;
use crate::qstate::io::matrix_to_json;
use crate::qstate::{bloch_operator, ComplexMatrix, SubnormalizedOperator};
use crate::steercrit::{check_epsilon, steered_eigenvalues, MeasurementDirection};
use crate::vec3::scale;

/// Traces of the `+1` entries must agree to this for domination to hold.
pub const TRACE_TOL: f64 = 1e-12;
pub const DOMINATION_TOL: f64 = 1e-12;

/// Bob's conditional operators for one measurement direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Assemblage {
    pub x_hat: MeasurementDirection,
    pub epsilon: f64,
    pub plus: SubnormalizedOperator,
    pub minus: SubnormalizedOperator,
    pub null: SubnormalizedOperator,
}

impl Assemblage {
    pub fn entry(&self, outcome: Outcome) -> &SubnormalizedOperator {
        match outcome {
            Outcome::Plus => &self.plus,
            Outcome::Minus => &self.minus,
            Outcome::Null => &self.null,
        }
    }

    /// `sum_X sigma_X`, which is `I/2` for a valid assemblage.
    pub fn total(&self) -> ComplexMatrix {
        &(&self.plus.matrix + &self.minus.matrix) + &self.null.matrix
    }

    pub fn to_json(&self) -> Value {
        let op = |s: &SubnormalizedOperator| json!({ "matrix": matrix_to_json(&s.matrix), "trace": s.weight });
        json!({
            "x_hat": self.x_hat,
            "entries": { "+1": op(&self.plus), "-1": op(&self.minus), "0": op(&self.null) },
        })
    }
}

/// `(1/2) ∫ |λ><λ| dz` over the intervals, for `λ` with `λ·s = z`.
fn integrate(intervals: &[ZInterval], s_hat: &[f64; 3]) -> SubnormalizedOperator {
    let (mut along, mut against) = (0.0, 0.0);
    for r in intervals {
        let len = r.hi - r.lo;
        let first_moment = 0.5 * (r.hi * r.hi - r.lo * r.lo);
        along += 0.25 * (len + first_moment);
        against += 0.25 * (len - first_moment);
    }
    let m = bloch_operator(0.5 * (along + against), &scale(s_hat, 0.5 * (along - against)));
    SubnormalizedOperator { matrix: m, weight: along + against }
}

/// Closed-form assemblage of the hidden-state model.
pub fn lhs_assemblage(c: &CanonicalState, epsilon: f64, x: &MeasurementDirection) -> Result<Assemblage> {
    let r = response_regions(c, epsilon, x)?;
    Ok(Assemblage {
        x_hat: *x,
        epsilon,
        plus: integrate(&r.intervals(Outcome::Plus), &r.s_hat),
        minus: integrate(&r.intervals(Outcome::Minus), &r.s_hat),
        null: integrate(&r.intervals(Outcome::Null), &r.s_hat),
    })
}

/// `sigma_{±1} = (eps/4)[(1 ± a·x) I ± (T x)·σ]`, `sigma_0 = (1 - eps) I/2`.
pub fn quantum_assemblage(c: &CanonicalState, epsilon: f64, x: &MeasurementDirection) -> Result<Assemblage> {
    check_epsilon(epsilon)?;
    let u = c.a_dot(x.as_array());
    let tx = c.t_apply(x.as_array());
    let q = 0.25 * epsilon;
    let plus = bloch_operator(q * (1.0 + u), &scale(&tx, q));
    let minus = bloch_operator(q * (1.0 - u), &scale(&tx, -q));
    let null = ComplexMatrix::identity(2).scale(0.5 * (1.0 - epsilon));
    Ok(Assemblage {
        x_hat: *x,
        epsilon,
        plus: SubnormalizedOperator::from_matrix(plus),
        minus: SubnormalizedOperator::from_matrix(minus),
        null: SubnormalizedOperator::from_matrix(null),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DominationReport {
    pub lambda_lhs: f64,
    pub lambda_quantum: f64,
    /// `lambda_lhs - lambda_quantum`.
    pub gap: f64,
    pub trace_lhs: f64,
    pub trace_quantum: f64,
    pub traces_match: bool,
    pub dominated: bool,
}

pub fn domination_check(c: &CanonicalState, epsilon: f64, x: &MeasurementDirection) -> Result<DominationReport> {
    let lhs = lhs_assemblage(c, epsilon, x)?;
    let (lambda_quantum, _) = steered_eigenvalues(c, epsilon, x)?;
    let lambda_lhs = lhs.plus.max_eigenvalue();
    let trace_lhs = lhs.plus.weight;
    let trace_quantum = 0.5 * epsilon * (1.0 + c.a_dot(x.as_array()));
    let traces_match = (trace_lhs - trace_quantum).abs() <= TRACE_TOL;
    Ok(DominationReport {
        lambda_lhs,
        lambda_quantum,
        gap: lambda_lhs - lambda_quantum,
        trace_lhs,
        trace_quantum,
        traces_match,
        dominated: traces_match && lambda_lhs >= lambda_quantum - DOMINATION_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::canonicalize;
    use crate::qstate::{pauli, steered_operator, werner};

    fn werner_canonical(mu: f64) -> CanonicalState {
        canonicalize(&werner(mu).unwrap()).unwrap().canonical
    }

    fn dir(x: [f64; 3]) -> MeasurementDirection {
        MeasurementDirection::normalized(x).unwrap()
    }

    #[test]
    fn unbiased_cap_eigenvalue() {
        let c = werner_canonical(0.3);
        for eps in [0.2, 0.6, 1.0] {
            let a = lhs_assemblage(&c, eps, &dir([0.3, -0.1, 0.8])).unwrap();
            assert!((a.plus.max_eigenvalue() - eps * (4.0 - eps) / 8.0).abs() < 1e-14);
        }
        let a = lhs_assemblage(&c, 0.6, &dir([0.0, 0.0, 1.0])).unwrap();
        assert!((a.plus.weight - 0.3).abs() < 1e-15);
    }

    #[test]
    fn sum_rules_and_null_entry() {
        let c = CanonicalState::new([0.2, -0.1, 0.3], [0.5, 0.3, -0.2]).unwrap();
        for x in [[1.0, 0.0, 0.0], [0.3, -0.4, 0.5], [-0.2, 0.1, -0.9]] {
            let x = dir(x);
            for eps in [0.0, 0.3, 1.0] {
                let a = lhs_assemblage(&c, eps, &x).unwrap();
                let half = ComplexMatrix::identity(2).scale(0.5);
                assert!(a.total().max_abs_diff(&half) < 1e-14);
                assert!(a.null.matrix.max_abs_diff(&half.scale(1.0 - eps)) < 1e-15);
                let diff = &half.scale(eps) - &a.plus.matrix;
                assert!(a.minus.matrix.max_abs_diff(&diff) < 1e-14);
            }
        }
    }

    #[test]
    fn quantum_matches_steered_operator() {
        let c = CanonicalState::new([0.2, -0.1, 0.3], [0.5, 0.3, -0.2]).unwrap();
        let rho = c.density_matrix().unwrap();
        let x = dir([0.3, -0.4, 0.5]);
        let eps = 0.7;
        let q = quantum_assemblage(&c, eps, &x).unwrap();
        let xs = x.as_array();
        let n = &(&pauli(0).scale(xs[0]) + &pauli(1).scale(xs[1])) + &pauli(2).scale(xs[2]);
        let proj_plus = &ComplexMatrix::identity(2).scale(0.5) + &n.scale(0.5);
        let proj_minus = &ComplexMatrix::identity(2).scale(0.5) - &n.scale(0.5);
        let sp = steered_operator(&rho, &proj_plus).unwrap().matrix.scale(eps);
        let sm = steered_operator(&rho, &proj_minus).unwrap().matrix.scale(eps);
        assert!(q.plus.matrix.max_abs_diff(&sp) < 1e-15);
        assert!(q.minus.matrix.max_abs_diff(&sm) < 1e-15);
    }

    #[test]
    fn quantum_werner_example() {
        let c = werner_canonical(0.8);
        let q = quantum_assemblage(&c, 0.5, &dir([0.0, 0.0, 1.0])).unwrap();
        let expected = bloch_operator(0.125, &[0.0, 0.0, -0.1]);
        assert!(q.plus.matrix.max_abs_diff(&expected) < 1e-15);

        let q = quantum_assemblage(&c, 0.0, &dir([0.0, 0.0, 1.0])).unwrap();
        assert_eq!(q.plus.weight, 0.0);
        assert!(q.null.matrix.max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-15);
    }

    #[test]
    fn domination_examples() {
        let x = dir([0.2, 0.5, -0.3]);
        let r = domination_check(&werner_canonical(0.5), 1.0, &x).unwrap();
        assert!((r.lambda_lhs - 0.375).abs() < 1e-14 && (r.lambda_quantum - 0.375).abs() < 1e-14);
        assert!(r.dominated);

        let r = domination_check(&werner_canonical(0.6), 1.0, &x).unwrap();
        assert!((r.lambda_quantum - 0.4).abs() < 1e-14);
        assert!(!r.dominated);

        let zero = CanonicalState::new([0.0; 3], [0.0; 3]).unwrap();
        for eps in [0.1, 0.5, 1.0] {
            let r = domination_check(&zero, eps, &x).unwrap();
            assert!((r.lambda_quantum - eps / 4.0).abs() < 1e-15);
            assert!(r.dominated);
        }
    }

    #[test]
    fn gap_is_scaled_objective_deficit() {
        let c = CanonicalState::new([0.2, -0.1, 0.3], [0.5, 0.3, -0.2]).unwrap();
        for x in [[1.0, 0.0, 0.0], [0.3, -0.4, 0.5], [-0.2, 0.1, -0.9]] {
            let x = dir(x);
            for eps in [0.2, 0.9] {
                let r = domination_check(&c, eps, &x).unwrap();
                let s = crate::steercrit::objective(&c, eps, &x).unwrap();
                assert!((r.gap - 0.25 * eps * (1.0 - s)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn json_shape() {
        let a = lhs_assemblage(&werner_canonical(0.5), 0.5, &dir([0.0, 0.0, 1.0])).unwrap();
        let v = a.to_json();
        assert_eq!(v["x_hat"], json!([0.0, 0.0, 1.0]));
        assert!(v["entries"]["+1"]["trace"].is_f64());
        assert_eq!(v["entries"]["0"]["matrix"].as_array().unwrap().len(), 2);
    }
}
