//! Dense complex linear algebra on small qubit registers.
//!
//! Qubit 0 is the most significant bit of a basis index, so `kron(A, B)` puts
//! `A` on qubit 0.

mod eigen;
mod matrix;
mod pauli;
pub mod random;
mod state;

pub use eigen::{
    hermitian_eigen, hermitian_eigenvalues, max_eigenvalue, min_eigenvalue, operator_norm, trace_norm, HermitianEigen,
};
pub use matrix::{kron, kron_all, ComplexMatrix, C64, HERMITIAN_TOL};
pub use pauli::{pauli_matrix, Pauli, PauliWord};
pub use state::{
    check_qubits, deposit, embed_operator, extract, partial_trace, partial_trace_matrix, project_to_state, qubit_shift,
    trace_distance, DensityMatrix, StateVector, STATE_TOL,
};

use crate::error::{QpcpError, Result};

pub const DEFAULT_MAX_QUBITS: usize = 14;

/// Qubit cap from `QPCP_MAX_QUBITS`, defaulting to 14.
pub fn max_qubits() -> usize {
    std::env::var("QPCP_MAX_QUBITS").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_MAX_QUBITS)
}

pub fn check_cap(num_qubits: usize) -> Result<()> {
    let cap = max_qubits();
    if num_qubits > cap {
        return Err(QpcpError::DimensionCap { requested: num_qubits, cap });
    }
    Ok(())
}

/// Parses a bitstring such as "0110".
pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(QpcpError::InvalidParameter(format!("bitstring contains {other:?}"))),
        })
        .collect()
}

pub fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// ⌈log₂ n⌉ with ⌈log₂ 1⌉ = 0.
pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}
