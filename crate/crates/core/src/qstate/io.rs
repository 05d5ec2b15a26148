//! JSON state documents.
//!
//! A document carries `"dm"` (a 4x4 array of `{"re", "im"}` objects),
//! `"pauli"` (`{"a": [3], "b": [3], "T": [3][3]}`), or both. The reader
//! prefers `"dm"` when both are present. Canonical-form documents as written
//! by the canonicalizer (`{"a": [3], "t": [3], ...}`) are accepted as well and
//! read as `b = 0`, `T = diag(t)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{pauli_compose, pauli_decompose, ComplexMatrix, DensityMatrix, PauliForm, NOISY_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JsonComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for JsonComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

/// Row-major nested array view of a matrix, as used by every JSON format here.
pub fn matrix_to_json(m: &ComplexMatrix) -> Vec<Vec<JsonComplex>> {
    (0..m.dim()).map(|i| (0..m.dim()).map(|j| m[(i, j)].into()).collect()).collect()
}

pub fn matrix_from_json(rows: &[Vec<JsonComplex>]) -> Result<ComplexMatrix> {
    let dim = rows.len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Malformed("density matrix rows must have equal length".into()));
    }
    let data = rows.iter().flatten().map(|z| Complex64::new(z.re, z.im)).collect();
    ComplexMatrix::from_row_major(dim, data)
}

#[derive(Debug, Clone, Serialize)]
pub struct StateDocument {
    pub dm: Vec<Vec<JsonComplex>>,
    pub pauli: PauliForm,
}

impl StateDocument {
    pub fn from_state(rho: &DensityMatrix) -> Result<Self> {
        Ok(Self { dm: matrix_to_json(rho.matrix()), pauli: pauli_decompose(rho)? })
    }
}

#[derive(Deserialize)]
struct CanonicalDoc {
    a: [f64; 3],
    t: [f64; 3],
}

fn malformed(e: serde_json::Error) -> Error {
    Error::Malformed(e.to_string())
}

/// Reads a two-qubit state from any accepted document shape.
pub fn state_from_value(v: &Value) -> Result<DensityMatrix> {
    let obj = v.as_object().ok_or_else(|| Error::Malformed("state document must be a JSON object".into()))?;
    if let Some(dm) = obj.get("dm") {
        let rows: Vec<Vec<JsonComplex>> = serde_json::from_value(dm.clone()).map_err(malformed)?;
        let m = matrix_from_json(&rows)?;
        if m.dim() != 4 {
            return Err(Error::Dimension { expected: 4, got: m.dim() });
        }
        return DensityMatrix::with_tolerance(m, NOISY_TOL);
    }
    if let Some(p) = obj.get("pauli") {
        let p: PauliForm = serde_json::from_value(p.clone()).map_err(malformed)?;
        return pauli_compose(&p);
    }
    if obj.contains_key("a") && obj.contains_key("t") {
        let c: CanonicalDoc = serde_json::from_value(v.clone()).map_err(malformed)?;
        let mut t = [[0.0; 3]; 3];
        for i in 0..3 {
            t[i][i] = c.t[i];
        }
        return pauli_compose(&PauliForm { a: c.a, b: [0.0; 3], t });
    }
    Err(Error::Malformed("state document needs \"dm\", \"pauli\" or canonical \"a\"/\"t\" fields".into()))
}

pub fn state_from_str(s: &str) -> Result<DensityMatrix> {
    let v: Value = serde_json::from_str(s).map_err(malformed)?;
    state_from_value(&v)
}

pub fn state_to_string(rho: &DensityMatrix) -> Result<String> {
    serde_json::to_string(&StateDocument::from_state(rho)?).map_err(malformed)
}
