//! Transformations of local Hamiltonians and the verifiers built from them.

mod kitaev;
mod sampling;
mod smooth;

pub use kitaev::{kitaev_verifier, rotation};
pub use sampling::{sample_count, sample_terms, weighted_error_check, WeightedErrorReport};
pub use smooth::{redistribution_count, smooth, Smoothed};

use crate::error::Result;
use crate::linalg::min_eigenvalue;
use crate::reduction::LocalHamiltonian;

/// Exact λ_min of the assembled operator.
pub fn ground_energy(h: &LocalHamiltonian) -> Result<f64> {
    min_eigenvalue(&h.assemble()?)
}
