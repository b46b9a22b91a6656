//! Named verifier families used by tests, the CLI and the acceptance suite.

use rand::Rng;

use crate::circuit::{prepare_real_amplitudes, Circuit, GateSpec, NamedGate};
use crate::error::{QpcpError, Result};
use crate::linalg::random::{random_psd, random_unitary};
use crate::linalg::{ceil_log2, ComplexMatrix, DensityMatrix, StateVector, C64};
use crate::protocols::SeparableWitness;
use crate::reduction::{LocalHamiltonian, Term};
use crate::tomography::MarginalSpec;
use crate::verifier::{AdaptiveVerifier, NonAdaptiveVerifier, Registers};

fn small_registers(k: usize, p2: usize) -> Registers {
    let b = ceil_log2(k * p2);
    Registers { n: 0, p1: b + 1, k, p2 }
}

fn index_qubits(regs: &Registers, blocks: usize) -> Vec<usize> {
    (regs.n..regs.n + blocks * regs.index_width()).collect()
}

/// X gates turning register value `from` into `to`.
fn relabel(reg: &[usize], from: usize, to: usize) -> Circuit {
    let w = reg.len();
    (0..w).filter(|r| ((from ^ to) >> (w - 1 - r)) & 1 == 1).map(|r| GateSpec::x(reg[r])).collect()
}

/// Queries indices 0, 1, …, q−1 in turn; `last` is the final circuit.
fn deterministic(k: usize, p2: usize, q: usize, first: Circuit, last: Circuit) -> Result<AdaptiveVerifier> {
    let regs = small_registers(k, p2);
    if q == 0 || q > regs.proof_qubits() {
        return Err(QpcpError::InvalidParameter(format!("q = {q} with {} proof qubits", regs.proof_qubits())));
    }
    let reg = index_qubits(&regs, 1);
    let mut circuits = vec![first];
    for t in 1..q {
        circuits.push(relabel(&reg, t - 1, t));
    }
    circuits.push(last);
    let out = regs.n + regs.index_width();
    AdaptiveVerifier::new(regs, q, circuits, reg, out)
}

pub fn reject_always(k: usize, p2: usize, q: usize) -> Result<AdaptiveVerifier> {
    deterministic(k, p2, q, vec![], vec![])
}

pub fn accept_always(k: usize, p2: usize, q: usize) -> Result<AdaptiveVerifier> {
    let out = ceil_log2(k * p2);
    deterministic(k, p2, q, vec![], vec![GateSpec::x(out)])
}

/// Single query on proof qubit `index`, accepting iff it reads 1.
pub fn copy_verifier(k: usize, p2: usize, index: usize) -> Result<AdaptiveVerifier> {
    let regs = small_registers(k, p2);
    let reg = index_qubits(&regs, 1);
    let out = regs.index_width();
    let slot = regs.work_qubits();
    AdaptiveVerifier::new(
        regs,
        1,
        vec![relabel(&reg, 0, index), vec![GateSpec::named(NamedGate::CNOT, vec![slot, out])]],
        reg,
        out,
    )
}

/// Single query on proof qubit `index`, rejecting with probability ⟨+|ξ|+⟩.
pub fn plus_check(k: usize, p2: usize, index: usize) -> Result<AdaptiveVerifier> {
    let regs = small_registers(k, p2);
    let reg = index_qubits(&regs, 1);
    let out = regs.index_width();
    let slot = regs.work_qubits();
    let last = vec![GateSpec::named(NamedGate::H, vec![slot]), GateSpec::named(NamedGate::CNOT, vec![slot, out])];
    AdaptiveVerifier::new(regs, 1, vec![relabel(&reg, 0, index), last], reg, out)
}

/// Single uniformly random query that always rejects. Needs k·p2 a power of two.
pub fn uniform_reject(k: usize, p2: usize) -> Result<AdaptiveVerifier> {
    let regs = small_registers(k, p2);
    if regs.proof_qubits() != 1 << regs.index_width() {
        return Err(QpcpError::InvalidParameter("k·p2 must be a power of two".into()));
    }
    let reg = index_qubits(&regs, 1);
    let first = reg.iter().map(|&r| GateSpec::named(NamedGate::H, vec![r])).collect();
    let out = regs.index_width();
    AdaptiveVerifier::new(regs, 1, vec![first, vec![]], reg, out)
}

fn random_amplitudes<R: Rng + ?Sized>(valid: usize, width: usize, rng: &mut R) -> Vec<f64> {
    let mut a = vec![0.0; 1 << width];
    for v in a.iter_mut().take(valid) {
        *v = rng.random::<f64>() + 0.05;
    }
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    a.iter().map(|x| x / norm).collect()
}

/// Cyclic shift i ↦ (i + c) mod n on the first n basis states of a `width`-qubit register.
fn shift_matrix(n: usize, c: usize, width: usize) -> ComplexMatrix {
    let dim = 1usize << width;
    ComplexMatrix::from_fn(dim, dim, |r, col| {
        let image = if col < n { (col + c) % n } else { col };
        if r == image {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

fn check_random_shape(regs: &Registers, q: usize, blocks: usize) -> Result<()> {
    if q == 0 || q > 2 || q > regs.proof_qubits() {
        return Err(QpcpError::InvalidParameter(format!("random verifiers support q in 1..=2, got {q}")));
    }
    if regs.p1 < blocks * regs.index_width() + 1 {
        return Err(QpcpError::InvalidParameter(format!(
            "p1 = {} leaves no room for a {}-qubit index register and an output",
            regs.p1,
            blocks * regs.index_width()
        )));
    }
    Ok(())
}

/// Random adaptive verifier with q ≤ 2. The first index is drawn from a
/// distribution that depends on the input and the output qubit; the second
/// is a proof-dependent cyclic shift of the first, so it never repeats.
pub fn random_adaptive<R: Rng + ?Sized>(regs: Registers, q: usize, rng: &mut R) -> Result<AdaptiveVerifier> {
    check_random_shape(&regs, q, 1)?;
    let nproof = regs.proof_qubits();
    let b = regs.index_width();
    let reg = index_qubits(&regs, 1);
    let out = regs.n + b;
    let work = regs.work_qubits();
    let free: Vec<usize> = (0..work).filter(|qb| !reg.contains(qb)).collect();

    let mut first = vec![GateSpec::unitary(random_unitary(1 << free.len(), rng), free.clone())];
    for value in [false, true] {
        let prep = prepare_real_amplitudes(&random_amplitudes(nproof, b, rng), &reg);
        first.extend(prep.iter().map(|g| g.controlled(out, value)));
    }
    let mut circuits = vec![first];
    if q == 2 {
        let slot0 = work;
        let mut second = vec![GateSpec::unitary(random_unitary(4, rng), vec![out, slot0])];
        let cases = (0..4).map(|v| (v, shift_matrix(nproof, rng.random_range(1..nproof), b))).collect();
        second.push(GateSpec::multiplexed(vec![out, slot0], cases, reg.clone()));
        circuits.push(second);
    }
    let mut last_qubits = vec![out];
    last_qubits.extend(work..work + q);
    circuits.push(vec![GateSpec::unitary(random_unitary(1 << last_qubits.len(), rng), last_qubits)]);
    AdaptiveVerifier::new(regs, q, circuits, reg, out)
}

/// Random non-adaptive verifier: the q-tuple of distinct indices is drawn
/// from a fixed random distribution, then a random unitary acts on the output
/// and the queried qubits.
pub fn random_nonadaptive<R: Rng + ?Sized>(regs: Registers, q: usize, rng: &mut R) -> Result<NonAdaptiveVerifier> {
    check_random_shape(&regs, q, q)?;
    let nproof = regs.proof_qubits();
    let b = regs.index_width();
    let reg = index_qubits(&regs, q);
    let out = regs.n + q * b;
    let work = regs.work_qubits();
    let free: Vec<usize> = (0..work).filter(|qb| !reg.contains(qb)).collect();
    let mut amps = vec![0.0; 1 << (q * b)];
    for (value, a) in amps.iter_mut().enumerate() {
        let blocks: Vec<usize> = (0..q).map(|s| (value >> ((q - 1 - s) * b)) & ((1 << b) - 1)).collect();
        let valid = blocks.iter().all(|&i| i < nproof) && (q == 1 || blocks[0] != blocks[1]);
        if valid {
            *a = rng.random::<f64>() + 0.05;
        }
    }
    let norm = amps.iter().map(|x| x * x).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    let mut prepare = vec![GateSpec::unitary(random_unitary(1 << free.len(), rng), free)];
    prepare.extend(prepare_real_amplitudes(&amps, &reg));
    let mut last_qubits = vec![out];
    last_qubits.extend(work..work + q);
    let finish = vec![GateSpec::unitary(random_unitary(1 << last_qubits.len(), rng), last_qubits)];
    NonAdaptiveVerifier::new(regs, q, prepare, finish, reg, out)
}

/// One query on a single proof qubit; accepts with probability
/// a0·⟨0|ξ|0⟩ + a1·⟨1|ξ|1⟩.
pub fn gentle_verifier(a0: f64, a1: f64) -> Result<NonAdaptiveVerifier> {
    let regs = Registers { n: 0, p1: 1, k: 1, p2: 1 };
    let rot = |a: f64| {
        let (c, s) = ((1.0 - a).max(0.0).sqrt(), a.clamp(0.0, 1.0).sqrt());
        ComplexMatrix::from_rows(&[vec![C64::new(c, 0.0), C64::new(-s, 0.0)], vec![C64::new(s, 0.0), C64::new(c, 0.0)]])
    };
    let finish = vec![GateSpec::multiplexed(vec![1], vec![(0, rot(a0)), (1, rot(a1))], vec![0])];
    NonAdaptiveVerifier::new(regs, 1, vec![], finish, vec![], 0)
}

/// n-qubit GHZ state with all of its two-qubit marginals.
pub fn ghz_marginals(n: usize) -> Result<(DensityMatrix, MarginalSpec)> {
    if n < 2 {
        return Err(QpcpError::InvalidParameter(format!("ghz needs at least 2 qubits, got {n}")));
    }
    let d = 1usize << n;
    let mut amps = vec![C64::new(0.0, 0.0); d];
    amps[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[d - 1] = amps[0];
    let rho = StateVector::new(amps)?.to_density();
    let spec = MarginalSpec::of_state(&rho, (0..n).flat_map(|i| (i + 1..n).map(move |j| vec![i, j])).collect())?;
    Ok((rho, spec))
}

/// Two single-qubit registers, H = (|1⟩⟨1|₀ + |1⟩⟨1|₁ + |11⟩⟨11|)/3, with the
/// honest product witness |00⟩.
pub fn product_separable() -> Result<(LocalHamiltonian, SeparableWitness)> {
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let p1 = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
    let p11 = ComplexMatrix::from_real_diag(&[0.0, 0.0, 0.0, 1.0]);
    let terms = vec![
        Term { support: vec![0], matrix: p1.clone() },
        Term { support: vec![1], matrix: p1 },
        Term { support: vec![0, 1], matrix: p11 },
    ];
    let h = LocalHamiltonian::new(2, 2, terms, Some(vec![1.0 / 3.0; 3]))?;
    let ket0 = ComplexMatrix::from_rows(&[vec![one, zero], vec![zero, zero]]);
    let unit = ComplexMatrix::identity(1);
    let classical = vec![vec![ket0.clone(), unit.clone()], vec![unit, ket0.clone()], vec![ket0.clone(), ket0]];
    Ok((h, SeparableWitness { classical, quantum: DensityMatrix::basis(2, 0) }))
}

/// Random Hamiltonian of `m` PSD terms on random `locality`-subsets, term norms
/// uniform in (0, 1]. With `weighted` the weights are a random distribution;
/// otherwise the unweighted sum is scaled down to norm at most 1.
pub fn random_hamiltonian<R: Rng + ?Sized>(
    n: usize,
    locality: usize,
    m: usize,
    weighted: bool,
    rng: &mut R,
) -> Result<LocalHamiltonian> {
    if locality == 0 || locality > n || m == 0 {
        return Err(QpcpError::InvalidParameter(format!("n = {n}, locality = {locality}, m = {m}")));
    }
    let terms: Vec<Term> = (0..m)
        .map(|_| {
            let mut support = rand::seq::index::sample(rng, n, locality).into_vec();
            support.sort_unstable();
            let norm = 1.0 - rng.random::<f64>();
            Term { support, matrix: random_psd(1 << locality, norm, rng) }
        })
        .collect();
    if weighted {
        let raw: Vec<f64> = (0..m).map(|_| 0.05 + rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        return LocalHamiltonian::new(n, locality, terms, Some(raw.iter().map(|w| w / total).collect()));
    }
    let h = LocalHamiltonian::new(n, locality, terms, None)?;
    let norm = h.norm()?;
    Ok(h.scaled(1.0 / norm.max(1.0)))
}

/// One single-qubit term of norm `heavy` plus `m − 1` light ones; smoothing
/// must split the heavy term when m ≥ 9.
pub fn spiky_hamiltonian<R: Rng + ?Sized>(n: usize, m: usize, heavy: f64, rng: &mut R) -> Result<LocalHamiltonian> {
    let light = (1.0 - heavy) / (m.max(2) - 1) as f64;
    let terms: Vec<Term> = (0..m)
        .map(|i| {
            let norm = if i == 0 { heavy } else { light * (1.0 - 0.5 * rng.random::<f64>()) };
            Term { support: vec![rng.random_range(0..n)], matrix: random_psd(2, norm, rng) }
        })
        .collect();
    LocalHamiltonian::new(n, 1, terms, None)
}
