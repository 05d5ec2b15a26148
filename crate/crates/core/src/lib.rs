//! Certification of non-steerability for two-qubit states whose steering
//! party suffers heralding loss.
//!
//! The pipeline is: reduce a state to canonical form ([`canonical`]), maximize
//! the loss-dependent objective over measurement directions ([`steercrit`]),
//! and, independently, simulate the explicit local-hidden-state model that
//! backs the criterion ([`lhsmodel`]). [`tomo`] wraps the whole thing in a
//! synthetic tomography bootstrap.
//!
//! Pauli basis order is `(x, y, z)` throughout, with `sigma_y = [[0, -i], [i, 0]]`.
//! Two-qubit basis ordering is `|ab>` with Alice's qubit as the most
//! significant index.

#![forbid(unsafe_code)]

pub mod canonical;
pub mod error;
pub mod lhsmodel;
pub mod qstate;
pub mod sampling;
pub mod steercrit;
pub mod tomo;
mod vec3;

pub use error::{Error, Result};
