//! Simulation of quantum PCP verifiers and the local Hamiltonians they induce.
//!
//! Everything is dense and exact on small registers (at most
//! [`linalg::max_qubits`] qubits), so each estimator can be checked against a
//! direct linear-algebra computation.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod error;
pub mod fixtures;
pub mod hamiltonian;
pub mod linalg;
pub mod protocols;
pub mod reduction;
pub mod repro;
pub mod rng;
pub mod tomography;
pub mod verifier;

pub use error::{QpcpError, Result};
