use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::circuit::{apply_circuit, Circuit, GateSpec, NamedGate};
use crate::error::{QpcpError, Result};
use crate::linalg::{check_cap, ComplexMatrix, C64};

/// Shots per part so that each ±1 mean is within ε with probability ≥ 1 − δ/2.
pub fn hadamard_shots(eps: f64, delta: f64) -> Result<u64> {
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(QpcpError::InvalidParameter(format!("eps = {eps}, delta = {delta} must lie in (0, 1)")));
    }
    Ok((2.0 * (4.0 / delta).ln() / (eps * eps)).ceil() as u64)
}

fn interferometer(w: &[GateSpec], u_psi: &[GateSpec], u_phi: &[GateSpec], imaginary: bool) -> Circuit {
    let shift = |g: &GateSpec| g.remap(|q| q + 1);
    let mut c = vec![GateSpec::named(NamedGate::H, vec![0])];
    c.extend(u_psi.iter().map(|g| shift(g).controlled(0, false)));
    c.extend(u_phi.iter().chain(w).map(|g| shift(g).controlled(0, true)));
    if imaginary {
        let (one, zero) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        let s_dag = ComplexMatrix::from_rows(&[vec![one, zero], vec![zero, C64::new(0.0, -1.0)]]);
        c.push(GateSpec::unitary(s_dag, vec![0]));
    }
    c.push(GateSpec::named(NamedGate::H, vec![0]));
    c
}

/// Pr[control reads 0] for the real-part and imaginary-part interferometers,
/// i.e. ((1 + Re z)/2, (1 + Im z)/2) with z = ⟨ψ|W|φ⟩, ψ = U_ψ|0⟩, φ = U_φ|0⟩.
pub fn hadamard_probabilities(
    w: &[GateSpec],
    u_psi: &[GateSpec],
    u_phi: &[GateSpec],
    num_qubits: usize,
) -> Result<(f64, f64)> {
    let n = num_qubits + 1;
    check_cap(n)?;
    let half = 1usize << num_qubits;
    let run = |imaginary: bool| {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[0] = C64::new(1.0, 0.0);
        apply_circuit(&interferometer(w, u_psi, u_phi, imaginary), &mut amps, n);
        amps[..half].iter().map(|a| a.norm_sqr()).sum::<f64>().clamp(0.0, 1.0)
    };
    Ok((run(false), run(true)))
}

/// Estimate of ⟨ψ|W|φ⟩, each part from `hadamard_shots(eps, delta)` control measurements.
pub fn hadamard_test<R: Rng + ?Sized>(
    w: &[GateSpec],
    u_psi: &[GateSpec],
    u_phi: &[GateSpec],
    num_qubits: usize,
    eps: f64,
    delta: f64,
    rng: &mut R,
) -> Result<C64> {
    let shots = hadamard_shots(eps, delta)?;
    let (p_re, p_im) = hadamard_probabilities(w, u_psi, u_phi, num_qubits)?;
    let mut part = |p: f64| -> Result<f64> {
        let zeros = Binomial::new(shots, p)
            .map_err(|e| QpcpError::InvalidParameter(format!("binomial sampler: {e}")))?
            .sample(rng);
        Ok(2.0 * zeros as f64 / shots as f64 - 1.0)
    };
    let re = part(p_re)?;
    let im = part(p_im)?;
    Ok(C64::new(re, im))
}
