use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{response_regions, Assemblage, Outcome, ResponseRegions};
use crate::canonical::CanonicalState;
use crate::error::{Error, Result};
use crate::qstate::io::matrix_to_json;
use crate::qstate::{bloch_operator, ComplexMatrix, SubnormalizedOperator};
use crate::sampling::stream_rng;
use crate::steercrit::MeasurementDirection;
use crate::vec3::orthonormal_frame;

/// Samples per independently seeded chunk.
pub const MC_CHUNK: usize = 1 << 16;

const OUTCOMES: [Outcome; 3] = [Outcome::Plus, Outcome::Minus, Outcome::Null];

/// Sample estimate of an assemblage with elementwise standard errors.
/// The real and imaginary parts of each `std_err` entry are the standard
/// errors of the corresponding parts of the estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct McAssemblage {
    pub estimate: Assemblage,
    pub std_err: [ComplexMatrix; 3],
    pub n_samples: usize,
}

impl McAssemblage {
    pub fn std_err_of(&self, outcome: Outcome) -> &ComplexMatrix {
        &self.std_err[OUTCOMES.iter().position(|&o| o == outcome).expect("known outcome")]
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.estimate.to_json();
        v["std_err"] = json!({
            "+1": matrix_to_json(self.std_err_of(Outcome::Plus)),
            "-1": matrix_to_json(self.std_err_of(Outcome::Minus)),
            "0": matrix_to_json(self.std_err_of(Outcome::Null)),
        });
        v["n_samples"] = json!(self.n_samples);
        v
    }
}

/// Per-outcome sums of the Bloch vectors of the hidden states and of their squares.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    sum: [f64; 3],
    sum_sq: [f64; 3],
}

impl Moments {
    fn push(&mut self, n: &[f64; 3]) {
        self.count += 1;
        for i in 0..3 {
            self.sum[i] += n[i];
            self.sum_sq[i] += n[i] * n[i];
        }
    }

    fn merge(&mut self, other: &Self) {
        self.count += other.count;
        for i in 0..3 {
            self.sum[i] += other.sum[i];
            self.sum_sq[i] += other.sum_sq[i];
        }
    }
}

fn sample_chunk(regions: &ResponseRegions, seed: u64, chunk: usize, len: usize) -> [Moments; 3] {
    let (e1, e2) = orthonormal_frame(&regions.s_hat);
    let s = regions.s_hat;
    let mut rng = stream_rng(seed, chunk as u64);
    let mut m = [Moments::default(); 3];
    for _ in 0..len {
        let z: f64 = rng.random_range(-1.0..=1.0);
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let r = (1.0 - z * z).max(0.0).sqrt();
        let (c, sn) = (r * phi.cos(), r * phi.sin());
        let n = std::array::from_fn(|i| z * s[i] + c * e1[i] + sn * e2[i]);
        let slot = match regions.classify(z) {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
            Outcome::Null => 2,
        };
        m[slot].push(&n);
    }
    m
}

/// Mean and standard error of a per-sample quantity from its sum and sum of squares.
fn mean_and_err(sum: f64, sum_sq: f64, n: f64) -> (f64, f64) {
    let mean = sum / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    (mean, (var / n).sqrt())
}

fn estimate(m: &Moments, total: usize) -> (SubnormalizedOperator, ComplexMatrix) {
    let n = total as f64;
    let k = m.count as f64;
    // Each sample contributes 1{X} (I + n·σ)/2; its matrix elements are
    // (1 ± n_z)/2 on the diagonal and (n_x ∓ i n_y)/2 off it.
    let weight = k / n;
    let half = [0.5 * m.sum[0] / n, 0.5 * m.sum[1] / n, 0.5 * m.sum[2] / n];
    let matrix = bloch_operator(0.5 * weight, &half);

    let (_, err_diag) = mean_and_err(0.5 * (k + m.sum[2]), 0.25 * (k + 2.0 * m.sum[2] + m.sum_sq[2]), n);
    let (_, err_diag_low) = mean_and_err(0.5 * (k - m.sum[2]), 0.25 * (k - 2.0 * m.sum[2] + m.sum_sq[2]), n);
    let (_, err_re) = mean_and_err(0.5 * m.sum[0], 0.25 * m.sum_sq[0], n);
    let (_, err_im) = mean_and_err(0.5 * m.sum[1], 0.25 * m.sum_sq[1], n);
    let mut err = ComplexMatrix::zeros(2);
    err[(0, 0)] = Complex64::new(err_diag, 0.0);
    err[(1, 1)] = Complex64::new(err_diag_low, 0.0);
    err[(0, 1)] = Complex64::new(err_re, err_im);
    err[(1, 0)] = Complex64::new(err_re, err_im);
    (SubnormalizedOperator { matrix, weight }, err)
}

/// Monte Carlo estimate of [`super::lhs_assemblage`] from `n_samples` uniformly
/// drawn hidden states. Chunk `k` of [`MC_CHUNK`] samples uses stream `k` of
/// `seed`, and chunk sums are combined in chunk order, so the result does not
/// depend on the thread count.
pub fn lhs_assemblage_mc(
    c: &CanonicalState,
    epsilon: f64,
    x: &MeasurementDirection,
    n_samples: usize,
    seed: u64,
) -> Result<McAssemblage> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
    }
    let regions = response_regions(c, epsilon, x)?;
    let chunks = n_samples.div_ceil(MC_CHUNK);
    let partial: Vec<[Moments; 3]> = (0..chunks)
        .into_par_iter()
        .map(|k| sample_chunk(&regions, seed, k, MC_CHUNK.min(n_samples - k * MC_CHUNK)))
        .collect();
    let mut total = [Moments::default(); 3];
    for p in &partial {
        for i in 0..3 {
            total[i].merge(&p[i]);
        }
    }
    let [(plus, ep), (minus, em), (null, en)] = total.map(|m| estimate(&m, n_samples));
    Ok(McAssemblage {
        estimate: Assemblage { x_hat: *x, epsilon, plus, minus, null },
        std_err: [ep, em, en],
        n_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lhsmodel::lhs_assemblage;

    fn z() -> MeasurementDirection {
        MeasurementDirection::new([0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn deterministic_per_seed() {
        let c = CanonicalState::new([0.1, 0.0, 0.2], [0.4, 0.3, 0.2]).unwrap();
        let a = lhs_assemblage_mc(&c, 0.7, &z(), 150_000, 5).unwrap();
        let b = lhs_assemblage_mc(&c, 0.7, &z(), 150_000, 5).unwrap();
        assert_eq!(a, b);
        let d = lhs_assemblage_mc(&c, 0.7, &z(), 150_000, 6).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn single_sample_is_rank_one_in_one_bin() {
        let c = CanonicalState::new([0.0; 3], [0.4, 0.3, 0.2]).unwrap();
        let mc = lhs_assemblage_mc(&c, 0.5, &z(), 1, 9).unwrap();
        let weights = [mc.estimate.plus.weight, mc.estimate.minus.weight, mc.estimate.null.weight];
        assert_eq!(weights.iter().filter(|&&w| w == 1.0).count(), 1);
        assert_eq!(weights.iter().filter(|&&w| w == 0.0).count(), 2);
        let hit = OUTCOMES[weights.iter().position(|&w| w == 1.0).unwrap()];
        let es = crate::qstate::hermitian_eigensystem(&mc.estimate.entry(hit).matrix).unwrap();
        assert!((es.eigenvalues[0] - 1.0).abs() < 1e-12 && es.eigenvalues[1].abs() < 1e-12);
    }

    #[test]
    fn converges_to_closed_form() {
        let c = CanonicalState::new([0.1, -0.2, 0.3], [0.5, -0.3, 0.2]).unwrap();
        let x = MeasurementDirection::normalized([0.4, 0.1, -0.6]).unwrap();
        let exact = lhs_assemblage(&c, 0.8, &x).unwrap();
        let mc = lhs_assemblage_mc(&c, 0.8, &x, 400_000, 11).unwrap();
        for o in OUTCOMES {
            let d = mc.estimate.entry(o).matrix.max_abs_diff(&exact.entry(o).matrix);
            assert!(d < 5e-3, "{o:?}: {d}");
        }
    }

    #[test]
    fn zero_samples_rejected() {
        let c = CanonicalState::new([0.0; 3], [0.0; 3]).unwrap();
        assert!(lhs_assemblage_mc(&c, 0.5, &z(), 0, 1).is_err());
    }
}
