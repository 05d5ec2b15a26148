use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("expected a {expected}x{expected} matrix, got {got}x{got}")]
    Dimension { expected: usize, got: usize },

    #[error("unsupported matrix dimension {0} (only 2 and 4)")]
    UnsupportedDimension(usize),

    #[error("matrix is not Hermitian (residue {0:e})")]
    NotHermitian(f64),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("trace deviates from 1 by {0:e}")]
    Trace(f64),

    #[error("state is unphysical (minimum eigenvalue {0:e})")]
    Unphysical(f64),

    #[error("Pauli coefficient has imaginary residue {0:e}")]
    ImaginaryResidue(f64),

    #[error("effect must satisfy 0 <= E <= I (eigenvalues in [{min:e}, {max:e}])")]
    InvalidEffect { min: f64, max: f64 },

    #[error("Bob's marginal is pure (minimum eigenvalue {0:e}); the state is trivially non-steerable")]
    PureMarginal(f64),

    #[error("Bob's Bloch vector must vanish before diagonalization (|b| = {0:e})")]
    NonzeroBobVector(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("POVM lifting requires 4*epsilon <= 1 (got 4*epsilon = {0})")]
    NotApplicable(f64),

    #[error("flip construction precondition violated: {0}")]
    FlipPrecondition(String),

    #[error("LHS assemblage does not dominate the target (gap {0:e})")]
    DominationFailure(f64),

    #[error("measurement setting {0} has no counts")]
    EmptySetting(String),

    #[error("ensemble is empty")]
    EmptyEnsemble,

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
