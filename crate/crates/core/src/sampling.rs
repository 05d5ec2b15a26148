//! Seeded random generation shared by the search, the Monte Carlo
//! simulator and the property suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::canonical::CanonicalState;
use crate::steercrit::MeasurementDirection;

/// Independent substream `stream` of the generator seeded by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniformly distributed unit vector.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> MeasurementDirection {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    MeasurementDirection::new_unchecked([r * phi.cos(), r * phi.sin(), z])
}

fn uniform_in_ball<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        if v[0] * v[0] + v[1] * v[1] + v[2] * v[2] <= 1.0 {
            return v;
        }
    }
}

/// Rejection sampler: `a` uniform in the unit ball, `t` uniform in `[-1, 1]³`,
/// kept when the composed state is physical. `t` is returned as drawn, so the
/// ordering convention of the canonicalizer is not imposed.
pub fn random_canonical_state<R: Rng + ?Sized>(rng: &mut R) -> CanonicalState {
    loop {
        let a = uniform_in_ball(rng);
        let t = [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)];
        if let Ok(c) = CanonicalState::new(a, t) {
            return c;
        }
    }
}
