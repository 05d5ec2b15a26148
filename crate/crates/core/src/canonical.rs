//! Reduction of a two-qubit state to canonical form: Bob's marginal made
//! maximally mixed by local filtering, and the correlation matrix made
//! diagonal by local rotations on both sides.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qstate::{
    eigensystem_of_hermitian_part, partial_traces, pauli_compose, pauli_decompose, ComplexMatrix,
    DensityMatrix, PauliForm,
};
use crate::vec3::{dot, norm, Vec3};

/// Bob's marginal is treated as pure below this eigenvalue.
pub const PURE_MARGINAL_CUTOFF: f64 = 1e-8;

const BOB_VECTOR_TOL: f64 = 1e-9;

/// `rho = (I⊗I + a·σ⊗I + Σ t_i σ_i⊗σ_i) / 4`, with `t1 >= t2 >= |t3|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalState {
    pub a: [f64; 3],
    pub t: [f64; 3],
}

impl CanonicalState {
    /// Checked constructor: the composed state must be physical.
    pub fn new(a: [f64; 3], t: [f64; 3]) -> Result<Self> {
        let c = Self { a, t };
        c.density_matrix()?;
        Ok(c)
    }

    /// No physicality check; for evaluating the formulas on arbitrary parameters.
    pub fn new_unchecked(a: [f64; 3], t: [f64; 3]) -> Self {
        Self { a, t }
    }

    pub fn pauli_form(&self) -> PauliForm {
        let mut t = [[0.0; 3]; 3];
        for i in 0..3 {
            t[i][i] = self.t[i];
        }
        PauliForm { a: self.a, b: [0.0; 3], t }
    }

    pub fn density_matrix(&self) -> Result<DensityMatrix> {
        pauli_compose(&self.pauli_form())
    }

    /// `a · x`.
    #[inline]
    pub fn a_dot(&self, x: &Vec3) -> f64 {
        dot(&self.a, x)
    }

    /// `T x` with `T = diag(t)`.
    #[inline]
    pub fn t_apply(&self, x: &Vec3) -> Vec3 {
        [self.t[0] * x[0], self.t[1] * x[1], self.t[2] * x[2]]
    }

    /// `||T x||`.
    #[inline]
    pub fn t_norm(&self, x: &Vec3) -> f64 {
        norm(&self.t_apply(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalizationResult {
    #[serde(flatten)]
    pub canonical: CanonicalState,
    #[serde(rename = "rotation_A")]
    pub rotation_a: [[f64; 3]; 3],
    #[serde(rename = "rotation_B")]
    pub rotation_b: [[f64; 3]; 3],
    pub trivially_nonsteerable: bool,
    pub filter_applied: bool,
}

const IDENTITY3: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// `(I⊗F) rho (I⊗F†) / Tr[...]` with `F = rho_B^{-1/2}`.
pub fn bob_filter(rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != 4 {
        return Err(Error::Dimension { expected: 4, got: rho.dim() });
    }
    let (_, rho_b) = partial_traces(rho.matrix());
    let es = eigensystem_of_hermitian_part(&rho_b);
    if es.min_eigenvalue() <= PURE_MARGINAL_CUTOFF {
        return Err(Error::PureMarginal(es.min_eigenvalue()));
    }
    let f = es.map_spectrum(|l| 1.0 / l.sqrt());
    let k = ComplexMatrix::identity(2).kron(&f);
    let m = &(&k * rho.matrix()) * &k.adjoint();
    let tr = m.trace().re;
    let m = m.scale(1.0 / tr).hermitian_part();
    DensityMatrix::with_tolerance(m, crate::qstate::NOISY_TOL)
}

fn to_array(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m[(i, j)];
        }
    }
    out
}

/// Finds `R_A, R_B ∈ SO(3)` with `R_A T R_Bᵀ = diag(t)`, `t1 >= t2 >= |t3|`,
/// and rotates Alice's Bloch vector along. Requires `b = 0`.
pub fn diagonalize_correlations(p: &PauliForm) -> Result<CanonicalizationResult> {
    let b_norm = norm(&p.b);
    if b_norm > BOB_VECTOR_TOL {
        return Err(Error::NonzeroBobVector(b_norm));
    }
    let t = Matrix3::from_fn(|i, j| p.t[i][j]);
    let svd = t.svd(true, true);
    let u = svd.u.expect("requested U");
    let v = svd.v_t.expect("requested Vᵀ").transpose();
    let sv = svd.singular_values;

    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let mut u = Matrix3::from_columns(&[u.column(order[0]), u.column(order[1]), u.column(order[2])]);
    let mut v = Matrix3::from_columns(&[v.column(order[0]), v.column(order[1]), v.column(order[2])]);
    let mut t_diag = [sv[order[0]], sv[order[1]], sv[order[2]]];

    // Fix the joint sign freedom of each singular pair: largest |U| entry positive.
    for k in 0..3 {
        let col = u.column(k);
        let pivot = (0..3).fold(0, |best, i| if col[i].abs() > col[best].abs() + 1e-12 { i } else { best });
        if col[pivot] < 0.0 {
            u.set_column(k, &(-u.column(k)));
            v.set_column(k, &(-v.column(k)));
        }
    }
    // Reflections are absorbed as a sign on the smallest entry.
    if u.determinant() < 0.0 {
        u.set_column(2, &(-u.column(2)));
        t_diag[2] = -t_diag[2];
    }
    if v.determinant() < 0.0 {
        v.set_column(2, &(-v.column(2)));
        t_diag[2] = -t_diag[2];
    }

    let rotation_a = u.transpose();
    let rotation_b = v.transpose();
    let a = rotation_a * Vector3::from(p.a);
    Ok(CanonicalizationResult {
        canonical: CanonicalState::new_unchecked([a[0], a[1], a[2]], t_diag),
        rotation_a: to_array(&rotation_a),
        rotation_b: to_array(&rotation_b),
        trivially_nonsteerable: false,
        filter_applied: false,
    })
}

/// Filter, decompose and diagonalize. A pure Bob marginal is reported as
/// trivially non-steerable rather than as an error.
pub fn canonicalize(rho: &DensityMatrix) -> Result<CanonicalizationResult> {
    if rho.dim() != 4 {
        return Err(Error::Dimension { expected: 4, got: rho.dim() });
    }
    let filtered = match bob_filter(rho) {
        Ok(f) => f,
        Err(Error::PureMarginal(_)) => {
            let p = pauli_decompose(rho)?;
            return Ok(CanonicalizationResult {
                canonical: CanonicalState::new_unchecked(p.a, [0.0; 3]),
                rotation_a: IDENTITY3,
                rotation_b: IDENTITY3,
                trivially_nonsteerable: true,
                filter_applied: false,
            });
        }
        Err(e) => return Err(e),
    };
    let (_, rho_b) = partial_traces(rho.matrix());
    let filter_applied = rho_b.max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) > 1e-12;
    let mut p = pauli_decompose(&filtered)?;
    let b_norm = norm(&p.b);
    if b_norm > BOB_VECTOR_TOL {
        return Err(Error::NonzeroBobVector(b_norm));
    }
    p.b = [0.0; 3];
    let mut result = diagonalize_correlations(&p)?;
    result.filter_applied = filter_applied;
    Ok(result)
}
