//! Exact small-matrix quantum-state algebra: Pauli decomposition, partial
//! traces, Werner states and steered operators.

mod eigen;
pub mod io;
mod matrix;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use eigen::{hermitian_eigensystem, EigenSystem, HERMITIAN_INPUT_TOL};
pub(crate) use eigen::eigensystem_of_hermitian_part;
pub use matrix::{bloch_operator, pauli, ComplexMatrix};

use crate::error::{Error, Result};

/// Tolerance for exact-math validation of density matrices.
pub const EXACT_TOL: f64 = 1e-10;
/// Tolerance for states coming out of noisy pipelines (tomography, composition).
pub const NOISY_TOL: f64 = 1e-8;

/// Hermitian, positive semidefinite, unit-trace matrix of dimension 2 or 4.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Validates at the exact-math tolerance (1e-10).
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(m, EXACT_TOL)
    }

    pub fn with_tolerance(m: ComplexMatrix, tol: f64) -> Result<Self> {
        let report = physicality_check(&m, tol);
        if report.hermiticity_residue > tol {
            return Err(Error::NotHermitian(report.hermiticity_residue));
        }
        if report.trace_deviation > tol {
            return Err(Error::Trace(report.trace_deviation));
        }
        if report.min_eigenvalue < -tol {
            return Err(Error::Unphysical(report.min_eigenvalue));
        }
        Ok(Self(m))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim).scale(1.0 / dim as f64))
    }

    /// `|psi><psi|` for a normalized state vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        Self::new(ComplexMatrix::outer(psi))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// Trace distance `||rho - sigma||_1 / 2`.
    pub fn trace_distance(&self, other: &Self) -> f64 {
        trace_distance(&self.0, &other.0)
    }

    fn require_two_qubit(&self) -> Result<()> {
        if self.dim() != 4 {
            return Err(Error::Dimension { expected: 4, got: self.dim() });
        }
        Ok(())
    }
}

/// `||A - B||_1 / 2` for Hermitian matrices.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let diff = a - b;
    let es = eigensystem_of_hermitian_part(&diff);
    0.5 * es.eigenvalues.iter().map(|l| l.abs()).sum::<f64>()
}

/// Bloch vectors and correlation matrix of a two-qubit state:
/// `rho = (I⊗I + a·σ⊗I + I⊗b·σ + Σ T_ij σ_i⊗σ_j) / 4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliForm {
    pub a: [f64; 3],
    pub b: [f64; 3],
    #[serde(rename = "T")]
    pub t: [[f64; 3]; 3],
}

impl PauliForm {
    pub fn zero() -> Self {
        Self { a: [0.0; 3], b: [0.0; 3], t: [[0.0; 3]; 3] }
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().chain(&self.b).chain(self.t.iter().flatten()).all(|x| x.is_finite())
    }
}

/// A 2x2 operator `Tr_A[(E⊗I) rho]` together with its trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SubnormalizedOperator {
    pub matrix: ComplexMatrix,
    pub weight: f64,
}

impl SubnormalizedOperator {
    pub fn from_matrix(matrix: ComplexMatrix) -> Self {
        let weight = matrix.trace().re;
        Self { matrix, weight }
    }

    pub fn zero() -> Self {
        Self { matrix: ComplexMatrix::zeros(2), weight: 0.0 }
    }

    pub fn max_eigenvalue(&self) -> f64 {
        eigensystem_of_hermitian_part(&self.matrix).max_eigenvalue()
    }
}

/// Diagnostics reported by [`physicality_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalityReport {
    pub hermiticity_residue: f64,
    pub trace_deviation: f64,
    pub min_eigenvalue: f64,
    pub pass: bool,
}

pub fn physicality_check(m: &ComplexMatrix, tol: f64) -> PhysicalityReport {
    let hermiticity_residue = m.hermiticity_residue();
    let tr = m.trace();
    let trace_deviation = ((tr.re - 1.0).powi(2) + tr.im.powi(2)).sqrt();
    let min_eigenvalue = eigensystem_of_hermitian_part(m).min_eigenvalue();
    PhysicalityReport {
        hermiticity_residue,
        trace_deviation,
        min_eigenvalue,
        pass: hermiticity_residue <= tol && trace_deviation <= tol && min_eigenvalue >= -tol,
    }
}

fn pauli_real_coefficient(op: &ComplexMatrix, rho: &ComplexMatrix) -> Result<f64> {
    let v = (op * rho).trace();
    if v.im.abs() > EXACT_TOL {
        return Err(Error::ImaginaryResidue(v.im.abs()));
    }
    Ok(v.re)
}

pub fn pauli_decompose(rho: &DensityMatrix) -> Result<PauliForm> {
    rho.require_two_qubit()?;
    let id = ComplexMatrix::identity(2);
    let m = rho.matrix();
    let mut p = PauliForm::zero();
    for i in 0..3 {
        p.a[i] = pauli_real_coefficient(&pauli(i).kron(&id), m)?;
        p.b[i] = pauli_real_coefficient(&id.kron(&pauli(i)), m)?;
        for j in 0..3 {
            p.t[i][j] = pauli_real_coefficient(&pauli(i).kron(&pauli(j)), m)?;
        }
    }
    Ok(p)
}

/// The 4x4 matrix for a Pauli form, without a physicality check.
pub fn compose_matrix(p: &PauliForm) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    let mut m = ComplexMatrix::identity(4);
    for i in 0..3 {
        m = &m + &pauli(i).kron(&id).scale(p.a[i]);
        m = &m + &id.kron(&pauli(i)).scale(p.b[i]);
        for j in 0..3 {
            if p.t[i][j] != 0.0 {
                m = &m + &pauli(i).kron(&pauli(j)).scale(p.t[i][j]);
            }
        }
    }
    m.scale(0.25)
}

/// Inverse of [`pauli_decompose`]; fails if the result has an eigenvalue below -1e-8.
pub fn pauli_compose(p: &PauliForm) -> Result<DensityMatrix> {
    if !p.is_finite() {
        return Err(Error::NonFinite);
    }
    let m = compose_matrix(p);
    let min = eigensystem_of_hermitian_part(&m).min_eigenvalue();
    if min < -NOISY_TOL {
        return Err(Error::Unphysical(min));
    }
    DensityMatrix::with_tolerance(m, NOISY_TOL)
}

/// `(Tr_B rho, Tr_A rho)`.
pub fn reduced_states(rho: &DensityMatrix) -> Result<(DensityMatrix, DensityMatrix)> {
    rho.require_two_qubit()?;
    let (ra, rb) = partial_traces(rho.matrix());
    Ok((DensityMatrix::new(ra)?, DensityMatrix::new(rb)?))
}

pub(crate) fn partial_traces(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let mut ra = ComplexMatrix::zeros(2);
    let mut rb = ComplexMatrix::zeros(2);
    for x in 0..2 {
        for y in 0..2 {
            for k in 0..2 {
                ra[(x, y)] += m[(2 * x + k, 2 * y + k)];
                rb[(x, y)] += m[(2 * k + x, 2 * k + y)];
            }
        }
    }
    (ra, rb)
}

/// `mu |Ψ⁻><Ψ⁻| + (1 - mu) I/4` with `|Ψ⁻> = (|01> - |10>)/√2`.
pub fn werner(mu: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::InvalidParameter(format!("Werner weight must lie in [0, 1], got {mu}")));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = [
        Complex64::new(0.0, 0.0),
        Complex64::new(h, 0.0),
        Complex64::new(-h, 0.0),
        Complex64::new(0.0, 0.0),
    ];
    let singlet = ComplexMatrix::outer(&psi);
    let m = &singlet.scale(mu) + &ComplexMatrix::identity(4).scale((1.0 - mu) / 4.0);
    DensityMatrix::new(m)
}

/// Bob's conditional operator `Tr_A[(E⊗I) rho]` for an effect `0 <= E <= I`.
pub fn steered_operator(rho: &DensityMatrix, effect: &ComplexMatrix) -> Result<SubnormalizedOperator> {
    rho.require_two_qubit()?;
    if effect.dim() != 2 {
        return Err(Error::Dimension { expected: 2, got: effect.dim() });
    }
    let es = hermitian_eigensystem(effect)?;
    let (max, min) = (es.max_eigenvalue(), es.min_eigenvalue());
    if min < -EXACT_TOL || max > 1.0 + EXACT_TOL {
        return Err(Error::InvalidEffect { min, max });
    }
    let weighted = &effect.kron(&ComplexMatrix::identity(2)) * rho.matrix();
    let (_, bob) = partial_traces(&weighted);
    Ok(SubnormalizedOperator::from_matrix(bob))
}
