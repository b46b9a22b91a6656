use rayon::prelude::*;
use serde::Serialize;

use super::decompose::{decompose, UnitaryDecomposition};
use super::{combinations, factorial, hadamard_shots, hadamard_test, permutations, slot_value, LocalHamiltonian, Term};
use crate::circuit::{Circuit, GateSpec};
use crate::error::{QpcpError, Result};
use crate::linalg::{check_cap, min_eigenvalue, ComplexMatrix, C64};
use crate::rng::SeedStream;
use crate::verifier::QueryVerifier;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LearnParams {
    /// Accuracy target (for the rounded variant, the accuracy implied by η).
    pub eps: f64,
    pub delta: f64,
    pub eps_prime: f64,
    pub delta_prime: f64,
    pub shots_per_part: u64,
    pub hadamard_tests: usize,
    pub omega: usize,
    pub gamma: usize,
    pub gamma_formula: usize,
    pub norm_before_scaling: f64,
    pub shifted_terms: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct Learned {
    pub hamiltonian: LocalHamiltonian,
    /// Term estimates before Hermitian symmetrization, PSD shift and scaling.
    pub estimates: Vec<ComplexMatrix>,
    pub params: LearnParams,
}

/// Nearest point of the grid −1 + kΔ, Δ = 4/2^η, k = 0..2^{η−1}; ties go down.
pub fn quantize(value: f64, eta: usize) -> f64 {
    let steps = 1usize << (eta - 1);
    let delta = 2.0 / steps as f64;
    let k = ((value.clamp(-1.0, 1.0) + 1.0) / delta - 0.5).ceil().clamp(0.0, steps as f64);
    -1.0 + k * delta
}

/// Γ′ = 2(q+1)·k·p2.
pub fn gamma_prime(q: usize, k: usize, p2: usize) -> usize {
    2 * (q + 1) * k * p2
}

/// η = ⌈q log₂(4Γ′(Γ′+1)/ε − 1)⌉.
pub fn protocol_eta(q: usize, gamma_prime: usize, eps: f64) -> usize {
    let g = gamma_prime as f64;
    (q as f64 * (4.0 * g * (g + 1.0) / eps - 1.0).log2()).ceil() as usize
}

/// 4|Ω|2^{q+4}q!/(2^η+1).
pub fn derived_rounding_eps(eta: usize, q: usize, omega: usize) -> f64 {
    4.0 * omega as f64 * 2f64.powi(q as i32 + 4) * factorial(q) as f64 / (2f64.powi(eta as i32) + 1.0)
}

struct Plan {
    supports: Vec<Vec<usize>>,
    /// (term, ordering) → decomposition on `[A | B | slots]`.
    decomps: Vec<(usize, Vec<usize>, UnitaryDecomposition)>,
    total: usize,
    gamma: usize,
    gamma_formula: usize,
}

fn plan<V: QueryVerifier + Sync + ?Sized>(v: &V, x: &[bool]) -> Result<Plan> {
    let regs = v.registers();
    let q = v.q();
    let work = regs.work_qubits();
    let total = work + q;
    check_cap(total + 1)?;
    let slots: Vec<usize> = (work..total).collect();
    let supports = combinations(regs.proof_qubits(), q);
    let mut decomps = Vec::new();
    for (t, support) in supports.iter().enumerate() {
        for path in permutations(support) {
            let d = decompose(v, x, &path, total, &slots)?;
            decomps.push((t, path, d));
        }
    }
    let (gamma, gamma_formula) = decomps
        .first()
        .map(|(_, _, d)| (d.gamma(), d.gamma_formula()))
        .ok_or_else(|| QpcpError::Structural("verifier has no index sets".into()))?;
    Ok(Plan { supports, decomps, total, gamma, gamma_formula })
}

fn basis_prep(value: usize, slots_start: usize, q: usize) -> Circuit {
    (0..q).filter(|s| (value >> (q - 1 - s)) & 1 == 1).map(|s| GateSpec::x(slots_start + s)).collect()
}

/// Runs every Hadamard test and returns the per-term sums over orderings.
fn estimate(
    plan: &Plan,
    q: usize,
    eps_prime: f64,
    delta_prime: f64,
    eta: Option<usize>,
    seed: &SeedStream,
) -> Result<Vec<ComplexMatrix>> {
    let local = 1usize << q;
    let slots_start = plan.total - q;
    let tasks: Vec<(usize, usize, usize)> = (0..plan.decomps.len())
        .flat_map(|d| (0..local).flat_map(move |a| (0..local).map(move |b| (d, a, b))))
        .collect();
    let entries: Vec<C64> = tasks
        .par_iter()
        .map(|&(di, a, b)| {
            let (t, path, dec) = &plan.decomps[di];
            let support = &plan.supports[*t];
            let perm = di - plan.decomps.iter().position(|(tt, _, _)| tt == t).unwrap_or(0);
            let u_psi = basis_prep(slot_value(a, support, path), slots_start, q);
            let u_phi = basis_prep(slot_value(b, support, path), slots_start, q);
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..dec.gamma() {
                let term = dec.term(j);
                let label = format!("hadamard/term={t}/perm={perm}/a={a}/b={b}/j={j}");
                let z = hadamard_test(
                    &term.circuit,
                    &u_psi,
                    &u_phi,
                    plan.total,
                    eps_prime,
                    delta_prime,
                    &mut seed.child_rng(label),
                )?;
                acc += z * term.sign;
            }
            let entry = acc / dec.gamma() as f64;
            Ok(match eta {
                Some(eta) => C64::new(quantize(entry.re, eta), quantize(entry.im, eta)),
                None => entry,
            })
        })
        .collect::<Result<_>>()?;
    let mut raw = vec![ComplexMatrix::zeros(local, local); plan.supports.len()];
    for (&(di, a, b), z) in tasks.iter().zip(entries) {
        raw[plan.decomps[di].0].add_at(a, b, z);
    }
    Ok(raw)
}

/// Hermitian part, PSD shift of any term with λ_min < 0, then division by max(‖H̃‖, 1).
fn finish(
    num_qubits: usize,
    q: usize,
    supports: &[Vec<usize>],
    raw: &[ComplexMatrix],
) -> Result<(LocalHamiltonian, f64, usize)> {
    let mut shifted = 0;
    let mut terms = Vec::with_capacity(raw.len());
    for (support, m) in supports.iter().zip(raw) {
        let mut h = m.hermitian_part();
        let lam = min_eigenvalue(&h)?;
        if lam < 0.0 {
            h = &h + &ComplexMatrix::identity(h.rows()).scale_real(-lam);
            shifted += 1;
        }
        terms.push(Term { support: support.clone(), matrix: h });
    }
    let h = LocalHamiltonian::new(num_qubits, q, terms, None)?;
    let norm = h.norm()?;
    Ok((h.scaled(1.0 / norm.max(1.0)), norm, shifted))
}

fn check_unit(name: &str, value: f64) -> Result<()> {
    if !(value > 0.0 && value < 1.0) {
        return Err(QpcpError::InvalidParameter(format!("{name} = {value} must lie in (0, 1)")));
    }
    Ok(())
}

/// Learns the verifier's Hamiltonian from simulated Hadamard tests on the
/// signed-unitary decomposition of every path operator.
pub fn learn_hamiltonian<V: QueryVerifier + Sync + ?Sized>(
    v: &V,
    x: &[bool],
    eps: f64,
    delta: f64,
    seed: &SeedStream,
) -> Result<Learned> {
    check_unit("eps", eps)?;
    check_unit("delta", delta)?;
    let q = v.q();
    let plan = plan(v, x)?;
    let omega = plan.supports.len();
    let qf = factorial(q) as f64;
    let eps_prime = eps / (omega as f64 * 2f64.powi(q as i32 + 4) * qf);
    let delta_prime = delta / (omega as f64 * qf * 4f64.powi(q as i32 + 1) * plan.gamma as f64);
    let raw = estimate(&plan, q, eps_prime, delta_prime, None, seed)?;
    let (hamiltonian, norm, shifted) = finish(v.registers().proof_qubits(), q, &plan.supports, &raw)?;
    let params = LearnParams {
        eps,
        delta,
        eps_prime,
        delta_prime,
        shots_per_part: hadamard_shots(eps_prime, delta_prime)?,
        hadamard_tests: plan.decomps.len() * (1 << (2 * q)) * plan.gamma,
        omega,
        gamma: plan.gamma,
        gamma_formula: plan.gamma_formula,
        norm_before_scaling: norm,
        shifted_terms: shifted,
        eta: None,
    };
    Ok(Learned { hamiltonian, estimates: raw, params })
}

/// Variant whose per-ordering entries are snapped to an η-bit grid, so that
/// independent successful runs return the same Hamiltonian bit for bit.
pub fn learn_hamiltonian_rounded<V: QueryVerifier + Sync + ?Sized>(
    v: &V,
    x: &[bool],
    eta: usize,
    delta: f64,
    seed: &SeedStream,
) -> Result<Learned> {
    if eta == 0 || eta > 40 {
        return Err(QpcpError::InvalidParameter(format!("eta = {eta} must lie in 1..=40")));
    }
    check_unit("delta", delta)?;
    let q = v.q();
    let plan = plan(v, x)?;
    let omega = plan.supports.len();
    let qf = factorial(q) as f64;
    let eps_prime = 1.0 / (2f64.powi(eta as i32) * qf);
    let delta_prime = delta / (omega as f64 * qf * 4f64.powi(q as i32 + 1) * plan.gamma as f64);
    let raw = estimate(&plan, q, eps_prime, delta_prime, Some(eta), seed)?;
    let (hamiltonian, norm, shifted) = finish(v.registers().proof_qubits(), q, &plan.supports, &raw)?;
    let params = LearnParams {
        eps: derived_rounding_eps(eta, q, omega),
        delta,
        eps_prime,
        delta_prime,
        shots_per_part: hadamard_shots(eps_prime, delta_prime)?,
        hadamard_tests: plan.decomps.len() * (1 << (2 * q)) * plan.gamma,
        omega,
        gamma: plan.gamma,
        gamma_formula: plan.gamma_formula,
        norm_before_scaling: norm,
        shifted_terms: shifted,
        eta: Some(eta),
    };
    Ok(Learned { hamiltonian, estimates: raw, params })
}
