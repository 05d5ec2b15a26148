//! Largest heralding efficiency at which the projective criterion certifies.
//!
//! The objective splits as `A(x) + eps D(x)` with `A = |a·x| + ||T x||` and
//! `D = (1 + (a·x)²)/2 - |a·x| >= 0`, so the threshold is `min_x (1 - A)/D`.
//! It is found by Dinkelbach iteration: maximize at the current `eps`, take
//! the ratio at that maximizer, repeat.

use serde::Serialize;

use super::{maximize_objective, MaximizeOptions, MeasurementDirection};
use crate::canonical::CanonicalState;
use crate::error::Result;

const UNIT_ALIGNMENT_TOL: f64 = 1e-9;
const CONVERGENCE_TOL: f64 = 1e-10;
const MAX_ROUNDS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    /// `None` when no efficiency certifies the state.
    pub epsilon_0: Option<f64>,
    pub argmax_x0: MeasurementDirection,
    pub numerator: f64,
    pub denominator: f64,
    pub always_nonsteerable: bool,
}

pub fn epsilon_threshold(c: &CanonicalState, opts: &MaximizeOptions) -> Result<ThresholdResult> {
    let mut eps = 1.0;
    let mut first = true;
    let mut last = None;
    for _ in 0..MAX_ROUNDS {
        let (value, x) = maximize_objective(c, eps, opts)?;
        let u = c.a_dot(x.as_array()).abs();
        let numerator = 1.0 - c.t_norm(x.as_array()) - u;
        let denominator = 0.5 * (1.0 + u * u) - u;
        let result = |epsilon_0, always_nonsteerable| ThresholdResult {
            epsilon_0,
            argmax_x0: x,
            numerator,
            denominator,
            always_nonsteerable,
        };
        if (u - 1.0).abs() <= UNIT_ALIGNMENT_TOL {
            return Ok(result(Some(1.0), true));
        }
        if first && value <= 1.0 {
            return Ok(result(Some(1.0), false));
        }
        first = false;
        if numerator <= 0.0 {
            return Ok(result(None, false));
        }
        let next = (numerator / denominator).min(1.0);
        let done = (next - eps).abs() <= CONVERGENCE_TOL;
        eps = next;
        last = Some(result(Some(next), false));
        if done {
            break;
        }
    }
    Ok(last.expect("at least one round"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::canonicalize;
    use crate::qstate::werner;
    use crate::steercrit::certify_projective;

    #[test]
    fn werner_threshold() {
        let c = canonicalize(&werner(0.75).unwrap()).unwrap().canonical;
        let r = epsilon_threshold(&c, &MaximizeOptions::default()).unwrap();
        assert!((r.epsilon_0.unwrap() - 0.5).abs() < 1e-12);
        assert!(!r.always_nonsteerable);
    }

    #[test]
    fn uncorrelated_is_clamped() {
        let c = CanonicalState::new([0.3, -0.2, 0.4], [0.0; 3]).unwrap();
        let r = epsilon_threshold(&c, &MaximizeOptions::default()).unwrap();
        assert_eq!(r.epsilon_0, Some(1.0));
    }

    #[test]
    fn maximally_entangled_has_none() {
        let c = CanonicalState::new([0.0; 3], [1.0, 1.0, -1.0]).unwrap();
        let r = epsilon_threshold(&c, &MaximizeOptions::default()).unwrap();
        assert_eq!(r.epsilon_0, None);
        assert!(r.numerator.abs() < 1e-12);
    }

    #[test]
    fn pure_alice_marginal_is_always_nonsteerable() {
        let c = CanonicalState::new([0.0, 0.0, 1.0], [0.0; 3]).unwrap();
        let r = epsilon_threshold(&c, &MaximizeOptions::default()).unwrap();
        assert!(r.always_nonsteerable);
    }

    #[test]
    fn threshold_separates_verdicts() {
        let c = CanonicalState::new([0.2, 0.1, 0.3], [0.6, 0.3, -0.2]).unwrap();
        let opts = MaximizeOptions::default();
        let r = epsilon_threshold(&c, &opts).unwrap();
        let e0 = r.epsilon_0.unwrap();
        assert!(e0 > 0.0 && e0 < 1.0, "{e0}");
        assert!(certify_projective(&c, e0 - 1e-6, &opts).unwrap().certified);
        assert!(!certify_projective(&c, e0 + 1e-6, &opts).unwrap().certified);
    }
}
