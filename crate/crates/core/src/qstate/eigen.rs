//! Hermitian eigensolver for 2x2 (closed form) and 4x4 (cyclic Jacobi) matrices.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Hermiticity residue accepted on input.
pub const HERMITIAN_INPUT_TOL: f64 = 1e-8;

const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 64;

/// Eigenvalues in descending order with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenSystem {
    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("eigensystem is never empty")
    }

    /// `V diag(f(λ)) V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.dim();
        let mut out = ComplexMatrix::zeros(n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += v[(i, k)] * v[(j, k)].conj() * w;
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|l| l)
    }
}

/// Rotation angle and phase that diagonalize the Hermitian block
/// `[[alpha, beta], [conj(beta), gamma]]`. Returns `(c, s, phase)` where the
/// block's eigenvectors are `(c, s e^{-iφ})` and `(-s, c e^{-iφ})`.
fn block_rotation(alpha: f64, beta: Complex64, gamma: f64) -> (f64, f64, Complex64) {
    let r = beta.norm();
    let phase = if r > 0.0 { (beta / r).conj() } else { Complex64::new(1.0, 0.0) };
    let theta = 0.5 * (2.0 * r).atan2(alpha - gamma);
    (theta.cos(), theta.sin(), phase)
}

fn solve_2x2(m: &ComplexMatrix) -> EigenSystem {
    let alpha = m[(0, 0)].re;
    let gamma = m[(1, 1)].re;
    let beta = m[(0, 1)];
    let mean = 0.5 * (alpha + gamma);
    let half_gap = (0.25 * (alpha - gamma).powi(2) + beta.norm_sqr()).sqrt();
    let (c, s, phase) = block_rotation(alpha, beta, gamma);
    let mut v = ComplexMatrix::zeros(2);
    v[(0, 0)] = Complex64::new(c, 0.0);
    v[(1, 0)] = phase * s;
    v[(0, 1)] = Complex64::new(-s, 0.0);
    v[(1, 1)] = phase * c;
    EigenSystem { eigenvalues: vec![mean + half_gap, mean - half_gap], eigenvectors: v }
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let n = m.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn solve_jacobi(m: &ComplexMatrix) -> EigenSystem {
    let n = m.dim();
    let mut a = m.clone();
    let mut v = ComplexMatrix::identity(n);
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= OFF_DIAGONAL_TOL {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                if a[(p, q)].norm() == 0.0 {
                    continue;
                }
                let (c, s, phase) = block_rotation(a[(p, p)].re, a[(p, q)], a[(q, q)].re);
                // Columns p and q of the rotation are the block eigenvectors.
                let gp = [Complex64::new(c, 0.0), phase * s];
                let gq = [Complex64::new(-s, 0.0), phase * c];
                // a <- a G
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * gp[0] + aiq * gp[1];
                    a[(i, q)] = aip * gq[0] + aiq * gq[1];
                }
                // a <- G† a
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = gp[0].conj() * apj + gp[1].conj() * aqj;
                    a[(q, j)] = gq[0].conj() * apj + gq[1].conj() * aqj;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * gp[0] + viq * gp[1];
                    v[(i, q)] = vip * gq[0] + viq * gq[1];
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let mut vectors = ComplexMatrix::zeros(n);
    for (col, &k) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, col)] = v[(i, k)];
        }
    }
    EigenSystem {
        eigenvalues: order.iter().map(|&k| a[(k, k)].re).collect(),
        eigenvectors: vectors,
    }
}

/// Eigen-decomposition of a Hermitian matrix (residue at most 1e-8).
pub fn hermitian_eigensystem(m: &ComplexMatrix) -> Result<EigenSystem> {
    let residue = m.hermiticity_residue();
    if residue > HERMITIAN_INPUT_TOL {
        return Err(Error::NotHermitian(residue));
    }
    Ok(eigensystem_of_hermitian_part(m))
}

/// Eigen-decomposition of `(M + M†)/2`, never failing.
pub(crate) fn eigensystem_of_hermitian_part(m: &ComplexMatrix) -> EigenSystem {
    let h = m.hermitian_part();
    match h.dim() {
        2 => solve_2x2(&h),
        _ => solve_jacobi(&h),
    }
}
