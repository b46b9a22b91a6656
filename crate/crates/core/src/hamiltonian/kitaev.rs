use std::collections::BTreeMap;

use crate::circuit::{prepare_real_amplitudes, GateSpec};
use crate::error::{QpcpError, Result};
use crate::linalg::{ceil_log2, embed_operator, hermitian_eigen, ComplexMatrix, C64};
use crate::reduction::{LocalHamiltonian, TERM_TOL};
use crate::verifier::{NonAdaptiveVerifier, Registers};

/// R(λ) = [[√λ, −√(1−λ)], [√(1−λ), √λ]], with λ clamped to [0, 1].
pub fn rotation(lambda: f64) -> ComplexMatrix {
    let l = lambda.clamp(0.0, 1.0);
    let (c, s) = (l.sqrt(), (1.0 - l).sqrt());
    ComplexMatrix::from_rows(&[vec![C64::new(c, 0.0), C64::new(-s, 0.0)], vec![C64::new(s, 0.0), C64::new(c, 0.0)]])
}

/// Σ_λ |λ⟩⟨λ| ⊗ R(λ) on (term qubits, output), output last.
fn energy_unitary(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(h)?;
    let d = h.rows();
    let rots: Vec<ComplexMatrix> = eig.values.iter().map(|&l| rotation(l)).collect();
    Ok(ComplexMatrix::from_fn(2 * d, 2 * d, |r, c| {
        let (a, b) = (r / 2, r % 2);
        let (cc, dd) = (c / 2, c % 2);
        (0..d).map(|k| eig.vectors.get(a, k) * eig.vectors.get(cc, k).conj() * rots[k].get(b, dd)).sum()
    }))
}

/// Pads `support` to `size` indices with the smallest unused qubits.
fn pad(support: &[usize], size: usize) -> Vec<usize> {
    let mut out = support.to_vec();
    let mut q = 0;
    while out.len() < size {
        if !out.contains(&q) {
            out.push(q);
        }
        q += 1;
    }
    out.sort_unstable();
    out
}

/// Non-adaptive verifier that picks term i with probability pᵢ, queries its
/// qubits, and accepts with probability 1 − tr[Hᵢ ξ].
///
/// Terms are padded to a common size q′ and those with equal padded support
/// are merged into their weighted average. The index register holds q′ blocks
/// followed by the output qubit.
pub fn kitaev_verifier(h: &LocalHamiltonian) -> Result<NonAdaptiveVerifier> {
    let weights: Vec<f64> = match &h.weights {
        Some(w) => w.clone(),
        None => return Err(QpcpError::Precondition("kitaev verifier needs term weights".into())),
    };
    for (i, t) in h.terms.iter().enumerate() {
        let eig = hermitian_eigen(&t.matrix)?;
        let (lo, hi) = (eig.values[0], *eig.values.last().unwrap());
        if lo < -TERM_TOL || hi > 1.0 + TERM_TOL {
            return Err(QpcpError::Precondition(format!("term {i} has spectrum outside [0, 1]: [{lo}, {hi}]")));
        }
    }
    let nproof = h.num_qubits;
    let q = h.terms.iter().map(|t| t.support.len()).max().unwrap_or(0).max(1);
    if q > nproof {
        return Err(QpcpError::Precondition("terms act on more qubits than exist".into()));
    }
    let mut merged: BTreeMap<Vec<usize>, (f64, ComplexMatrix)> = BTreeMap::new();
    for (t, &w) in h.terms.iter().zip(&weights) {
        if w == 0.0 {
            continue;
        }
        let support = pad(&t.support, q);
        let positions: Vec<usize> = t.support.iter().map(|s| support.iter().position(|x| x == s).unwrap()).collect();
        let lifted = embed_operator(&t.matrix, &positions, q)?.scale_real(w);
        let entry = merged.entry(support).or_insert_with(|| (0.0, ComplexMatrix::zeros(1 << q, 1 << q)));
        entry.0 += w;
        entry.1 = &entry.1 + &lifted;
    }

    let b = ceil_log2(nproof);
    let regs = Registers { n: 0, p1: q * b + 1, k: 1, p2: nproof };
    let reg: Vec<usize> = (0..q * b).collect();
    let out = q * b;
    let work = regs.work_qubits();
    let encode = |s: &[usize]| s.iter().fold(0usize, |acc, &i| (acc << b) | i);

    let mut amps = vec![0.0; 1 << (q * b)];
    let mut cases = Vec::new();
    for (support, (w, m)) in &merged {
        amps[encode(support)] = w.sqrt();
        cases.push((encode(support), energy_unitary(&m.scale_real(1.0 / w))?));
    }
    let norm = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    let prepare = prepare_real_amplitudes(&amps, &reg);
    let mut targets: Vec<usize> = (work..work + q).collect();
    targets.push(out);
    let finish = if reg.is_empty() {
        vec![GateSpec::unitary(cases.remove(0).1, targets)]
    } else {
        vec![GateSpec::multiplexed(reg.clone(), cases, targets)]
    };
    NonAdaptiveVerifier::new(regs, q, prepare, finish, reg, out)
}
