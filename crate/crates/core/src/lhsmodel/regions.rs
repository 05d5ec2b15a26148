use serde::Serialize;

use crate::canonical::CanonicalState;
use crate::error::{Error, Result};
use crate::steercrit::MeasurementDirection;
use crate::vec3::{norm, scale};

/// Alice's announcement for a hidden state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Plus,
    Minus,
    Null,
}

/// Closed-open interval of the hidden-state coordinate `z = λ·s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ZInterval {
    fn new(lo: f64, hi: f64) -> Option<Self> {
        (hi > lo).then_some(Self { lo, hi })
    }

    /// Measure under the uniform distribution on the sphere (`z` uniform on `[-1, 1]`).
    pub fn measure(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn contains(&self, z: f64) -> bool {
        z >= self.lo && z < self.hi
    }
}

/// Response function of the hidden-state model for one measurement direction.
///
/// The null band is `[-(1 - eps), 1 - eps]`, symmetric so that the null
/// outcome averages to a multiple of the identity. The less likely of the two
/// announced outcomes takes a polar cap of its probability at its own pole;
/// the other takes the rest of the announced area.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponseRegions {
    pub epsilon: f64,
    pub s_hat: [f64; 3],
    /// `eps (a·x)`, so that the `+1` probability is `(eps + delta)/2`.
    pub delta: f64,
    /// Lower end of a `+1` cap of measure `(eps + delta)/2`.
    pub z_plus_cut: f64,
    /// Upper end of a `-1` cap of measure `(eps - delta)/2`.
    pub z_minus_cut: f64,
    pub null_band: ZInterval,
    pub plus: Vec<ZInterval>,
    pub minus: Vec<ZInterval>,
}

impl ResponseRegions {
    pub fn plus_measure(&self) -> f64 {
        self.plus.iter().map(ZInterval::measure).sum()
    }

    pub fn minus_measure(&self) -> f64 {
        self.minus.iter().map(ZInterval::measure).sum()
    }

    pub fn null_measure(&self) -> f64 {
        self.null_band.measure()
    }

    pub fn classify(&self, z: f64) -> Outcome {
        if self.plus.iter().any(|r| r.contains(z)) || z == 1.0 && self.plus.iter().any(|r| r.hi == 1.0) {
            Outcome::Plus
        } else if self.minus.iter().any(|r| r.contains(z)) {
            Outcome::Minus
        } else {
            Outcome::Null
        }
    }

    pub fn intervals(&self, outcome: Outcome) -> Vec<ZInterval> {
        match outcome {
            Outcome::Plus => self.plus.clone(),
            Outcome::Minus => self.minus.clone(),
            Outcome::Null => ZInterval::new(self.null_band.lo, self.null_band.hi).into_iter().collect(),
        }
    }
}

/// Steered-state axis `T x / ||T x||`, or `x` itself when `T x = 0`.
pub fn steering_axis(c: &CanonicalState, x: &MeasurementDirection) -> [f64; 3] {
    let tx = c.t_apply(x.as_array());
    let n = norm(&tx);
    if n > 0.0 {
        scale(&tx, 1.0 / n)
    } else {
        *x.as_array()
    }
}

pub fn response_regions(c: &CanonicalState, epsilon: f64, x: &MeasurementDirection) -> Result<ResponseRegions> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!("heralding efficiency must lie in [0, 1], got {epsilon}")));
    }
    let u = c.a_dot(x.as_array());
    let delta = epsilon * u;
    let edge = 1.0 - epsilon;
    let z_plus_cut = edge - delta;
    let z_minus_cut = -1.0 + epsilon - delta;
    let (plus, minus) = if u <= 0.0 {
        (
            ZInterval::new(z_plus_cut, 1.0).into_iter().collect(),
            [ZInterval::new(-1.0, -edge), ZInterval::new(edge, z_plus_cut)].into_iter().flatten().collect(),
        )
    } else {
        (
            [ZInterval::new(z_minus_cut, -edge), ZInterval::new(edge, 1.0)].into_iter().flatten().collect(),
            ZInterval::new(-1.0, z_minus_cut).into_iter().collect(),
        )
    };
    Ok(ResponseRegions {
        epsilon,
        s_hat: steering_axis(c, x),
        delta,
        z_plus_cut,
        z_minus_cut,
        null_band: ZInterval { lo: -edge, hi: edge },
        plus,
        minus,
    })
}
