use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::{ComplexMatrix, C64};
use super::state::{partial_trace_matrix, DensityMatrix, StateVector};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unitary via QR of a Ginibre matrix with the phases of R's diagonal removed.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    ComplexMatrix::from_fn(dim, dim, |row, col| {
        let d = r[(col, col)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        q[(row, col)] * phase
    })
}

/// Haar-random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> StateVector {
    let amps = (0..1usize << num_qubits).map(|_| gaussian(rng)).collect();
    StateVector::normalized(amps).expect("gaussian vector is nonzero")
}

/// Random mixed state W W†/tr with W of shape d×rank.
pub fn random_density<R: Rng + ?Sized>(num_qubits: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let d = 1usize << num_qubits;
    let w = ComplexMatrix::from_fn(d, rank.max(1), |_, _| gaussian(rng));
    let m = &w * &w.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_trusted(m.scale_real(1.0 / tr).hermitian_part())
}

/// Reduced state of a Haar-random pure state on `num_qubits` system qubits plus an equal-sized environment.
pub fn random_density_purified<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> DensityMatrix {
    let psi = random_pure_state(2 * num_qubits, rng);
    let keep: Vec<usize> = (0..num_qubits).collect();
    let full = psi.to_density();
    let m = partial_trace_matrix(full.matrix(), 2 * num_qubits, &keep).expect("valid subsystem");
    DensityMatrix::from_trusted(m.hermitian_part())
}

/// Random Hermitian matrix from the Gaussian unitary ensemble.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    g.hermitian_part()
}

/// Random PSD matrix with operator norm exactly `norm`.
pub fn random_psd<R: Rng + ?Sized>(dim: usize, norm: f64, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let m = (&g * &g.adjoint()).hermitian_part();
    let top = super::eigen::max_eigenvalue(&m).expect("hermitian");
    m.scale_real(norm / top)
}
