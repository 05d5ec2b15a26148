//! Non-steerability criteria for loss-depleted canonical states.
//!
//! For a canonical state `(a, t)` whose steering party heralds with
//! efficiency `eps`, the projective-measurement criterion is
//!
//! ```text
//! max_x [ (1 - eps)|a·x| + (eps/2)(1 + (a·x)²) + ||T x|| ] <= 1
//! ```
//!
//! over unit vectors `x`. The POVM criterion is the same condition at
//! efficiency `4 eps`.

mod maximize;
mod search;
mod threshold;

use serde::Serialize;

pub use maximize::{maximize_objective, maximize_on_sphere, MaximizeOptions, DEFAULT_GRID_POINTS};
pub use search::{
    merge_restarts, restart_schedule, search_counterexample, search_restart, RestartResult, SearchHit, SearchOptions,
    SearchReport, HIT_MARGIN,
};
pub use threshold::{epsilon_threshold, ThresholdResult};

use crate::canonical::CanonicalState;
use crate::error::{Error, Result};
use crate::vec3::{norm, Vec3};

/// Slack allowed on `objective_max <= 1`.
pub const CERTIFY_TOL: f64 = 1e-12;

const UNIT_TOL: f64 = 1e-12;

/// A projective measurement axis on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct MeasurementDirection([f64; 3]);

impl MeasurementDirection {
    /// Accepts vectors of unit norm within 1e-12.
    pub fn new(x: [f64; 3]) -> Result<Self> {
        let n = norm(&x);
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidParameter(format!("measurement direction must be a unit vector (norm {n})")));
        }
        Ok(Self(x))
    }

    /// Normalizes any non-zero finite vector.
    pub fn normalized(x: [f64; 3]) -> Result<Self> {
        let n = norm(&x);
        if !n.is_finite() || n == 0.0 {
            return Err(Error::InvalidParameter("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(Self([x[0] / n, x[1] / n, x[2] / n]))
    }

    pub(crate) fn new_unchecked(x: [f64; 3]) -> Self {
        Self(x)
    }

    pub fn as_array(&self) -> &[f64; 3] {
        &self.0
    }

    pub fn neg(&self) -> Self {
        Self([-self.0[0], -self.0[1], -self.0[2]])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionKind {
    Projective,
    Povm,
}

impl std::str::FromStr for ConditionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "projective" => Ok(Self::Projective),
            "povm" => Ok(Self::Povm),
            other => Err(Error::InvalidParameter(format!("unknown condition kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub kind: ConditionKind,
    pub epsilon: f64,
    /// Efficiency at which the projective objective was evaluated (`4 eps` for POVMs).
    pub effective_epsilon: f64,
    pub objective_max: f64,
    pub argmax: MeasurementDirection,
    pub certified: bool,
    pub trivially_nonsteerable: bool,
}

impl Verdict {
    /// Verdict for a state whose Bob marginal is pure.
    pub fn trivial(kind: ConditionKind, epsilon: f64) -> Self {
        let effective_epsilon = match kind {
            ConditionKind::Projective => epsilon,
            ConditionKind::Povm => 4.0 * epsilon,
        };
        Self {
            kind,
            epsilon,
            effective_epsilon,
            objective_max: 0.0,
            argmax: MeasurementDirection([0.0, 0.0, 1.0]),
            certified: true,
            trivially_nonsteerable: true,
        }
    }
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!("heralding efficiency must lie in [0, 1], got {epsilon}")));
    }
    Ok(())
}

#[inline]
pub(crate) fn objective_value(c: &CanonicalState, epsilon: f64, x: &Vec3) -> f64 {
    let u = c.a_dot(x);
    (1.0 - epsilon) * u.abs() + 0.5 * epsilon * (1.0 + u * u) + c.t_norm(x)
}

/// `(1 - eps)|a·x| + (eps/2)(1 + (a·x)²) + ||T x||`.
pub fn objective(c: &CanonicalState, epsilon: f64, x: &MeasurementDirection) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(objective_value(c, epsilon, x.as_array()))
}

/// The lossless (`eps = 1`) form, `(1 + (a·x)²)/2 + ||T x||`.
pub fn unit_efficiency_objective(c: &CanonicalState, x: &MeasurementDirection) -> f64 {
    let u = c.a_dot(x.as_array());
    0.5 * (1.0 + u * u) + c.t_norm(x.as_array())
}

/// Eigenvalues `(eps/4)(1 + a·x ± ||T x||)` of Bob's operator for outcome +1.
pub fn steered_eigenvalues(c: &CanonicalState, epsilon: f64, x: &MeasurementDirection) -> Result<(f64, f64)> {
    check_epsilon(epsilon)?;
    let u = c.a_dot(x.as_array());
    let n = c.t_norm(x.as_array());
    Ok((0.25 * epsilon * (1.0 + u + n), 0.25 * epsilon * (1.0 + u - n)))
}

pub fn certify_projective(c: &CanonicalState, epsilon: f64, opts: &MaximizeOptions) -> Result<Verdict> {
    let (objective_max, argmax) = maximize_objective(c, epsilon, opts)?;
    Ok(Verdict {
        kind: ConditionKind::Projective,
        epsilon,
        effective_epsilon: epsilon,
        objective_max,
        argmax,
        certified: objective_max <= 1.0 + CERTIFY_TOL,
        trivially_nonsteerable: false,
    })
}

/// POVM certification through the projective criterion at efficiency `4 eps`.
/// Fails with [`Error::NotApplicable`] when `4 eps > 1`.
pub fn certify_povm(c: &CanonicalState, epsilon: f64, opts: &MaximizeOptions) -> Result<Verdict> {
    check_epsilon(epsilon)?;
    let lifted = 4.0 * epsilon;
    if lifted > 1.0 {
        return Err(Error::NotApplicable(lifted));
    }
    let v = certify_projective(c, lifted, opts)?;
    Ok(Verdict { kind: ConditionKind::Povm, epsilon, effective_epsilon: lifted, ..v })
}

pub fn certify(c: &CanonicalState, epsilon: f64, kind: ConditionKind, opts: &MaximizeOptions) -> Result<Verdict> {
    match kind {
        ConditionKind::Projective => certify_projective(c, epsilon, opts),
        ConditionKind::Povm => certify_povm(c, epsilon, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::canonicalize;
    use crate::qstate::werner;

    fn werner_canonical(mu: f64) -> CanonicalState {
        canonicalize(&werner(mu).unwrap()).unwrap().canonical
    }

    fn dir(x: [f64; 3]) -> MeasurementDirection {
        MeasurementDirection::normalized(x).unwrap()
    }

    #[test]
    fn objective_examples() {
        let zero = CanonicalState::new([0.0; 3], [0.0; 3]).unwrap();
        assert_eq!(objective(&zero, 1.0, &dir([0.3, 0.1, -0.2])).unwrap(), 0.5);

        let w = werner_canonical(0.7);
        for x in [[1.0, 0.0, 0.0], [0.2, -0.5, 0.7], [0.0, 0.0, 1.0]] {
            assert!((objective(&w, 0.6, &dir(x)).unwrap() - 1.0).abs() < 1e-12);
        }

        // Outside the physical region, but the formula is still defined.
        let c = CanonicalState::new_unchecked([0.0, 0.0, 0.6], [0.3, 0.3, 0.5]);
        // 0.5*0.6 + 0.25*(1 + 0.36) + 0.5
        assert!((objective(&c, 0.5, &dir([0.0, 0.0, 1.0])).unwrap() - 1.14).abs() < 1e-12);
        assert!(objective(&c, 1.5, &dir([0.0, 0.0, 1.0])).is_err());
    }

    #[test]
    fn objective_is_even() {
        let c = CanonicalState::new([0.1, -0.3, 0.2], [0.5, 0.2, -0.1]).unwrap();
        let x = dir([0.3, -0.4, 0.5]);
        assert_eq!(objective(&c, 0.3, &x).unwrap(), objective(&c, 0.3, &x.neg()).unwrap());
    }

    #[test]
    fn direction_validation() {
        assert!(MeasurementDirection::new([1.0, 1e-13, 0.0]).is_ok());
        assert!(MeasurementDirection::new([1.0, 0.1, 0.0]).is_err());
        assert!(MeasurementDirection::normalized([0.0; 3]).is_err());
    }

    #[test]
    fn projective_examples() {
        let opts = MaximizeOptions::default();
        let v = certify_projective(&werner_canonical(0.5), 1.0, &opts).unwrap();
        assert!((v.objective_max - 1.0).abs() < 1e-12);
        assert!(v.certified);

        let v = certify_projective(&werner_canonical(0.7), 0.7, &opts).unwrap();
        assert!((v.objective_max - 1.05).abs() < 1e-12);
        assert!(!v.certified);

        let zero = CanonicalState::new([0.0; 3], [0.0; 3]).unwrap();
        for eps in [0.0, 0.4, 1.0] {
            assert!(certify_projective(&zero, eps, &opts).unwrap().certified);
        }
    }

    #[test]
    fn povm_examples() {
        let opts = MaximizeOptions::default();
        let v = certify_povm(&werner_canonical(0.9), 0.05, &opts).unwrap();
        assert!((v.objective_max - 1.0).abs() < 1e-12);
        assert!(v.certified);
        assert_eq!(v.kind, ConditionKind::Povm);

        let v = certify_povm(&werner_canonical(0.9837), 0.008, &opts).unwrap();
        assert!((v.objective_max - 0.9997).abs() < 1e-12);
        assert!(v.certified);

        let zero = CanonicalState::new([0.0; 3], [0.0; 3]).unwrap();
        assert!(matches!(certify_povm(&zero, 0.3, &opts), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn steered_eigenvalue_examples() {
        let w = werner_canonical(0.5);
        let x = dir([0.2, 0.3, 0.9]);
        let (p, m) = steered_eigenvalues(&w, 1.0, &x).unwrap();
        assert!((p - 0.375).abs() < 1e-12 && (m - 0.125).abs() < 1e-12);
        let (p, m) = steered_eigenvalues(&w, 0.5, &x).unwrap();
        assert!((p - 0.1875).abs() < 1e-12 && (m - 0.0625).abs() < 1e-12);

        let c = CanonicalState::new_unchecked([0.0, 0.0, 0.5], [0.5, 0.5, 0.5]);
        let (p, m) = steered_eigenvalues(&c, 1.0, &dir([0.0, 0.0, 1.0])).unwrap();
        assert!((p - 0.5).abs() < 1e-15 && (m - 0.25).abs() < 1e-15);
    }

    #[test]
    fn unit_efficiency_reduction() {
        let c = CanonicalState::new([0.1, -0.3, 0.2], [0.5, 0.2, -0.1]).unwrap();
        let x = dir([0.3, -0.4, 0.5]);
        assert!((objective(&c, 1.0, &x).unwrap() - unit_efficiency_objective(&c, &x)).abs() < 1e-15);
    }
}
