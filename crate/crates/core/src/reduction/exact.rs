use super::{combinations, permutations, slot_value, LocalHamiltonian, Term};
use crate::error::{QpcpError, Result};
use crate::linalg::{check_cap, ComplexMatrix, StateVector, C64};
use crate::verifier::{forced_reject_vector, QueryVerifier};

/// One PSD term per unordered q-subset of proof qubits, so that
/// Pr[accept] = 1 − tr[H ξ] for every proof ξ.
///
/// Works on the reduced register `[A | B | slots]`: for each ordering of a
/// subset the reject vectors φ_β = Π₀ V^{q+1} ⋯ Π V¹ |0⟩|β⟩ give the term
/// entries ⟨φ_α|φ_β⟩, summed over orderings.
pub fn exact_hamiltonian<V: QueryVerifier + ?Sized>(v: &V, x: &[bool]) -> Result<LocalHamiltonian> {
    v.validate()?;
    crate::verifier::check_input(v, x)?;
    let regs = v.registers();
    let q = v.q();
    let work = regs.work_qubits();
    let total = work + q;
    check_cap(total)?;
    let slots: Vec<usize> = (work..total).collect();
    let local = 1usize << q;
    let mut terms = Vec::new();
    for support in combinations(regs.proof_qubits(), q) {
        let mut m = ComplexMatrix::zeros(local, local);
        for path in permutations(&support) {
            let phis: Vec<Vec<C64>> = (0..local)
                .map(|alpha| {
                    let mut e = vec![C64::new(0.0, 0.0); 1 << total];
                    e[slot_value(alpha, &support, &path)] = C64::new(1.0, 0.0);
                    forced_reject_vector(v, x, &e, total, &slots, &path)
                })
                .collect();
            for a in 0..local {
                for b in 0..local {
                    let g: C64 = phis[a].iter().zip(&phis[b]).map(|(u, w)| u.conj() * w).sum();
                    m.add_at(a, b, g);
                }
            }
        }
        terms.push(Term { support, matrix: m });
    }
    LocalHamiltonian::new(regs.proof_qubits(), q, terms, None)
}

/// B with b_{α,α′} = ⟨α|⟨ψ| A |α′⟩|ψ⟩, where `a` acts on the free register
/// followed by the register holding ψ.
pub fn contract_fixed_state(a: &ComplexMatrix, psi: &StateVector) -> Result<ComplexMatrix> {
    let d_psi = psi.amplitudes().len();
    if !a.is_square() || !a.rows().is_multiple_of(d_psi) {
        return Err(QpcpError::DimensionMismatch(format!(
            "operator of size {}x{} cannot absorb a state of dimension {d_psi}",
            a.rows(),
            a.cols()
        )));
    }
    let d = a.rows() / d_psi;
    let amps = psi.amplitudes();
    Ok(ComplexMatrix::from_fn(d, d, |r, c| {
        let mut s = C64::new(0.0, 0.0);
        for (i, ai) in amps.iter().enumerate() {
            for (j, aj) in amps.iter().enumerate() {
                s += ai.conj() * a.get(r * d_psi + i, c * d_psi + j) * aj;
            }
        }
        s
    }))
}
