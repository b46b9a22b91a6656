//! End-to-end pipelines built from the verifier, reduction, Hamiltonian and
//! tomography pieces.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{circuit_matrix, GateSpec};
use crate::error::{QpcpError, Result};
use crate::hamiltonian::{ground_energy, kitaev_verifier, smooth, Smoothed};
use crate::linalg::{
    check_cap, hermitian_eigenvalues, kron, kron_all, partial_trace, partial_trace_matrix, trace_distance,
    ComplexMatrix, DensityMatrix, C64,
};
use crate::reduction::{gamma_prime, learn_hamiltonian_rounded, protocol_eta, Learned, LocalHamiltonian};
use crate::rng::SeedStream;
use crate::tomography::{cldm_copy_count, cldm_decide, estimate_marginals, CldmDecision, CopyCount};
use crate::verifier::{
    accept_probability_exact, check_input, parallel_repeat, sample_run, NonAdaptiveVerifier, QueryVerifier,
    RepeatedVerifier, Stage,
};

/// Probability that the learning step fails in the simulation pipelines.
pub fn pipeline_delta() -> f64 {
    1.0 - (2.0f64 / 3.0).sqrt()
}

fn check_gap(c: f64, s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&c) || !(0.0..=1.0).contains(&s) || c <= s {
        return Err(QpcpError::InvalidParameter(format!("need 0 <= s < c <= 1, got c = {c}, s = {s}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationLiteral {
    /// (c − s)/2^{q+4}.
    pub threshold: f64,
    pub yes_energy: f64,
    pub no_energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationParams {
    pub c: f64,
    pub s: f64,
    pub eps: f64,
    pub delta: f64,
    pub gamma_prime: usize,
    pub eta: usize,
    /// Energy bounds of the learned Hamiltonian after smoothing.
    pub a_smoothed: f64,
    pub b_smoothed: f64,
    pub threshold: f64,
    pub repetitions_full: u64,
    pub repetitions_executed: usize,
    pub required_accepts: usize,
    pub queries_full: u64,
    pub queries_executed: usize,
    pub kitaev_locality: usize,
    /// 1 − exp(−2R((b″ − a″)/2)²) at the executed repetition count.
    pub chernoff_confidence: f64,
    /// Parameters before the adjustments applied here, for comparison.
    pub as_stated: SimulationLiteral,
}

/// A non-adaptive verifier with a proof-independent query distribution that
/// simulates an arbitrary one.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub params: SimulationParams,
    pub learned: Learned,
    pub smoothed: Smoothed,
    pub composite: RepeatedVerifier<NonAdaptiveVerifier>,
}

impl Simulation {
    /// Exact acceptance on ξ^{⊗R}.
    pub fn accept_probability(&self, xi: &DensityMatrix) -> Result<f64> {
        self.composite.accept_probability_exact(&[], std::slice::from_ref(xi))
    }

    pub fn sample<R: Rng + ?Sized>(&self, xi: &DensityMatrix, rng: &mut R) -> Result<bool> {
        Ok(self.composite.sample_run(&[], std::slice::from_ref(xi), rng)?.1)
    }
}

pub const DEFAULT_REPETITION_CAP: usize = 64;

pub fn nonadaptive_simulation<V: QueryVerifier + Sync + ?Sized>(
    v: &V,
    x: &[bool],
    c: f64,
    s: f64,
    cap: usize,
    seed: &SeedStream,
) -> Result<Simulation> {
    check_gap(c, s)?;
    if cap == 0 {
        return Err(QpcpError::InvalidParameter("repetition cap must be positive".into()));
    }
    let regs = v.registers();
    let q = v.q();
    let eps = (c - s) / 4.0;
    let delta = pipeline_delta();
    let gp = gamma_prime(q, regs.k, regs.p2);
    let eta = protocol_eta(q, gp, eps);
    let learned = learn_hamiltonian_rounded(v, x, eta, delta, &seed.child("learn"))?;
    let smoothed = smooth(&learned.hamiltonian)?;
    let kitaev = kitaev_verifier(&smoothed.hamiltonian)?;
    let scale = smoothed.scale;
    let a2 = (1.0 - c + eps) / scale;
    let b2 = (1.0 - s - eps) / scale;
    let threshold = 1.0 - (a2 + b2) / 2.0;
    let full = (2.0 * (2.0 * scale / (c - s)).powi(2)).ceil();
    let executed = (full as usize).min(cap);
    let kitaev_locality = kitaev.q();
    let composite = parallel_repeat(kitaev, executed, threshold)?;
    let gap = (b2 - a2) / 2.0;
    let params = SimulationParams {
        c,
        s,
        eps,
        delta,
        gamma_prime: gp,
        eta,
        a_smoothed: a2,
        b_smoothed: b2,
        threshold,
        repetitions_full: full as u64,
        repetitions_executed: executed,
        required_accepts: composite.required_accepts(),
        queries_full: full as u64 * kitaev_locality as u64,
        queries_executed: composite.query_count(),
        kitaev_locality,
        chernoff_confidence: 1.0 - (-2.0 * executed as f64 * gap * gap).exp(),
        as_stated: SimulationLiteral { threshold: (c - s) / (2.0 * scale), yes_energy: s + eps, no_energy: c - eps },
    };
    Ok(Simulation { params, learned, smoothed, composite })
}

/// One verifier of a conjunction, reading `register` of the joint proof.
pub struct AndPart<'a> {
    pub verifier: &'a dyn QueryVerifier,
    pub input: Vec<bool>,
    pub register: Vec<usize>,
    pub proof: DensityMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AndReport {
    pub accept_probabilities: Vec<f64>,
    pub accept_probability: f64,
    pub sampled: Vec<bool>,
    pub accept: bool,
}

/// Runs every part on its own proof register and accepts iff all accept.
pub fn and_of_verifiers(parts: &[AndPart<'_>], seed: &SeedStream) -> Result<AndReport> {
    let mut used = std::collections::BTreeSet::new();
    for p in parts {
        if p.register.len() != p.verifier.registers().proof_qubits() {
            return Err(QpcpError::DimensionMismatch(format!(
                "register of {} qubits for a verifier reading {}",
                p.register.len(),
                p.verifier.registers().proof_qubits()
            )));
        }
        for &r in &p.register {
            if !used.insert(r) {
                return Err(QpcpError::RegisterOverlap(r));
            }
        }
    }
    let mut probs = Vec::with_capacity(parts.len());
    let mut sampled = Vec::with_capacity(parts.len());
    for (i, p) in parts.iter().enumerate() {
        probs.push(accept_probability_exact(p.verifier, &p.input, &p.proof)?);
        let mut rng = seed.child_rng(format!("and/part={i}"));
        sampled.push(sample_run(p.verifier, &p.input, &p.proof, &mut rng)?.1);
    }
    Ok(AndReport {
        accept_probability: probs.iter().product(),
        accept: sampled.iter().all(|&b| b),
        accept_probabilities: probs,
        sampled,
    })
}

/// Splits `num_qubits` into `k` contiguous equal registers.
pub fn equal_registers(num_qubits: usize, k: usize) -> Result<Vec<Vec<usize>>> {
    if k == 0 || !num_qubits.is_multiple_of(k) {
        return Err(QpcpError::InvalidParameter(format!("{num_qubits} qubits do not split into {k} equal registers")));
    }
    let size = num_qubits / k;
    Ok((0..k).map(|j| (j * size..(j + 1) * size).collect()).collect())
}

/// Witness for the k-separable check: per-term, per-register marginals plus
/// the quantum proof whose registers should carry them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableWitness {
    /// `classical[i][j]` lives on the qubits of term i inside register j
    /// (1×1 when the term misses the register).
    pub classical: Vec<Vec<ComplexMatrix>>,
    pub quantum: DensityMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparableLiteral {
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparableReport {
    pub a: f64,
    pub b: f64,
    pub a_prime: f64,
    pub b_prime: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eps_cldm: f64,
    pub delta: f64,
    pub witness_valid: bool,
    pub energy: f64,
    pub energy_ok: bool,
    pub cldm: Vec<CldmDecision>,
    pub copies: Vec<CopyCount>,
    pub accept: bool,
    /// Parameters before the adjustments applied here, for comparison.
    pub as_stated: SeparableLiteral,
}

fn valid_density(m: &ComplexMatrix, dim: usize) -> Result<bool> {
    if m.rows() != dim || m.cols() != dim || !m.is_hermitian(1e-9) {
        return Ok(false);
    }
    if (m.trace() - C64::new(1.0, 0.0)).norm() > 1e-9 {
        return Ok(false);
    }
    Ok(hermitian_eigenvalues(&m.hermitian_part())?[0] >= -1e-9)
}

/// Classical energy check followed by a marginal-consistency test of the
/// quantum proof on each register.
pub fn k_separable_check(
    h: &LocalHamiltonian,
    a: f64,
    b: f64,
    k: usize,
    witness: &SeparableWitness,
    seed: &SeedStream,
) -> Result<SeparableReport> {
    if !(a < b) {
        return Err(QpcpError::InvalidParameter(format!("need a < b, got a = {a}, b = {b}")));
    }
    let regs = equal_registers(h.num_qubits, k)?;
    let m = h.num_terms();
    let q = h.locality.max(1);
    let a_prime = a + (b - a) / 4.0;
    let b_prime = b - (b - a) / 4.0;
    let beta = (b - a) / (2.0 * q as f64 * m.max(1) as f64);
    let alpha = beta / 8f64.powi(q as i32);
    let eps_cldm = (beta - alpha) / 4.0;
    let delta = 1.0 / (3.0 * k as f64);
    if witness.quantum.num_qubits() != h.num_qubits {
        return Err(QpcpError::MalformedWitness(format!(
            "quantum witness has {} qubits, hamiltonian {}",
            witness.quantum.num_qubits(),
            h.num_qubits
        )));
    }
    if witness.classical.len() != m || witness.classical.iter().any(|row| row.len() != k) {
        return Err(QpcpError::MalformedWitness(format!("classical witness must be {m} x {k}")));
    }

    // Local pieces: qubits of each term inside each register, in register coordinates.
    let pieces: Vec<Vec<Vec<usize>>> = h
        .terms
        .iter()
        .map(|t| regs.iter().map(|r| t.support.iter().filter(|q| r.contains(q)).map(|q| q - r[0]).collect()).collect())
        .collect();

    let mut witness_valid = true;
    for (row, sizes) in witness.classical.iter().zip(&pieces) {
        for (rho, piece) in row.iter().zip(sizes) {
            witness_valid &= valid_density(rho, 1 << piece.len())?;
        }
    }
    let mut report = SeparableReport {
        a,
        b,
        a_prime,
        b_prime,
        alpha,
        beta,
        eps_cldm,
        delta,
        witness_valid,
        energy: f64::NAN,
        energy_ok: false,
        cldm: Vec::new(),
        copies: Vec::new(),
        accept: false,
        as_stated: SeparableLiteral { delta: k as f64 / 3.0 },
    };
    if !witness_valid {
        return Ok(report);
    }

    let mut energy = 0.0;
    for (i, t) in h.terms.iter().enumerate() {
        let state = kron_all(witness.classical[i].iter());
        energy += h.weight(i) * (t.matrix.matmul(&state)?.trace().re);
    }
    report.energy = energy;
    report.energy_ok = energy <= a_prime;

    let mut all = report.energy_ok;
    for (j, r) in regs.iter().enumerate() {
        let idx: Vec<usize> = (0..m).filter(|&i| !pieces[i][j].is_empty()).collect();
        if idx.is_empty() {
            continue;
        }
        let subsets: Vec<Vec<usize>> = idx.iter().map(|&i| pieces[i][j].clone()).collect();
        let targets: Vec<DensityMatrix> =
            idx.iter().map(|&i| DensityMatrix::new(witness.classical[i][j].hermitian_part())).collect::<Result<_>>()?;
        let local = partial_trace(&witness.quantum, r)?;
        let est = estimate_marginals(&local, &subsets, eps_cldm, delta, &seed.child(format!("register={j}")))?;
        let decision = cldm_decide(&est, &targets, alpha, eps_cldm)?;
        all &= decision.accept;
        report.copies.push(cldm_copy_count(subsets.len(), q, r.len(), eps_cldm, delta)?);
        report.cldm.push(decision);
    }
    report.accept = all;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QcmaLiteral {
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QcmaReport {
    pub c: f64,
    pub s: f64,
    pub eps: f64,
    pub eta: usize,
    pub learn_eps: f64,
    pub a: f64,
    pub b: f64,
    pub ground_energy: f64,
    pub accept: bool,
    /// Parameters before the adjustments applied here, for comparison.
    pub as_stated: QcmaLiteral,
}

/// Learns the Hamiltonian with rounding, then asks `oracle` whether its
/// ground energy is at most (a + b)/2.
pub fn qcma_pipeline<V, F>(
    v: &V,
    x: &[bool],
    c: f64,
    s: f64,
    oracle: F,
    seed: &SeedStream,
) -> Result<(QcmaReport, Learned)>
where
    V: QueryVerifier + Sync + ?Sized,
    F: FnOnce(&LocalHamiltonian, f64) -> Result<(bool, f64)>,
{
    check_gap(c, s)?;
    let regs = v.registers();
    let q = v.q();
    let eps = (c - s) / 4.0;
    let eta = protocol_eta(q, gamma_prime(q, regs.k, regs.p2), eps);
    let learned = learn_hamiltonian_rounded(v, x, eta, pipeline_delta(), &seed.child("learn"))?;
    let a = 1.0 - c + eps;
    let b = 1.0 - s - eps;
    let (accept, ground) = oracle(&learned.hamiltonian, (a + b) / 2.0)?;
    let report = QcmaReport {
        c,
        s,
        eps,
        eta,
        learn_eps: learned.params.eps,
        a,
        b,
        ground_energy: ground,
        accept,
        as_stated: QcmaLiteral { a: c + eps / 4.0, b: c - eps / 4.0 },
    };
    Ok((report, learned))
}

/// Exact diagonalization oracle.
pub fn exact_oracle(h: &LocalHamiltonian, threshold: f64) -> Result<(bool, f64)> {
    let e = ground_energy(h)?;
    Ok((e <= threshold, e))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QmaReport {
    pub eta: usize,
    pub learn_eps: f64,
    pub separable: SeparableReport,
}

/// Learns the Hamiltonian with rounding and runs the k-separable check with
/// energy bounds a = 1 − c + ε, b = 1 − s − ε.
pub fn qma_for_qpcp<V: QueryVerifier + Sync + ?Sized>(
    v: &V,
    x: &[bool],
    c: f64,
    s: f64,
    k: usize,
    witness: &SeparableWitness,
    seed: &SeedStream,
) -> Result<QmaReport> {
    check_gap(c, s)?;
    let regs = v.registers();
    let q = v.q();
    let eps = (c - s) / 4.0;
    let eta = protocol_eta(q, gamma_prime(q, regs.k, regs.p2), eps);
    let learned = learn_hamiltonian_rounded(v, x, eta, pipeline_delta(), &seed.child("learn"))?;
    let separable =
        k_separable_check(&learned.hamiltonian, 1.0 - c + eps, 1.0 - s - eps, k, witness, &seed.child("separable"))?;
    Ok(QmaReport { eta, learn_eps: learned.params.eps, separable })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrongReduction {
    pub runs: usize,
    pub threshold: f64,
    pub required_accepts: usize,
    /// Pr[exactly j accepting runs].
    pub count_distribution: Vec<f64>,
    pub accept_probability: f64,
    pub majority_accept_probability: f64,
    /// Trace distance between ξ and the average proof state after all runs.
    pub disturbance: f64,
    pub sampled_accepts: usize,
    pub accept: bool,
}

/// Per-run quantum instrument on the proof register: (accept, reject) branches,
/// unnormalized. After acceptance the final circuit is undone.
struct Instrument<'a, V: ?Sized> {
    v: &'a V,
    x: Vec<bool>,
    work: usize,
    total: usize,
}

impl<'a, V: QueryVerifier + ?Sized> Instrument<'a, V> {
    fn new(v: &'a V, x: &[bool]) -> Result<Self> {
        v.validate()?;
        check_input(v, x)?;
        let regs = v.registers();
        let total = regs.total_qubits();
        check_cap(total)?;
        Ok(Self { v, x: x.to_vec(), work: regs.work_qubits(), total })
    }

    fn mapped(&self, gates: &[GateSpec], path: &[usize]) -> ComplexMatrix {
        let work = self.work;
        let g: Vec<GateSpec> =
            gates.iter().map(|g| g.remap(|q| if q < work { q } else { work + path[q - work] })).collect();
        circuit_matrix(&g, self.total)
    }

    fn conj(u: &ComplexMatrix, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        u.matmul(rho)?.matmul(&u.adjoint())
    }

    fn bit(&self, i: usize, qubit: usize) -> usize {
        (i >> (self.total - 1 - qubit)) & 1
    }

    fn project(rho: &ComplexMatrix, keep: impl Fn(usize) -> bool) -> ComplexMatrix {
        ComplexMatrix::from_fn(rho.rows(), rho.cols(), |r, c| {
            if keep(r) && keep(c) {
                rho.get(r, c)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    fn apply(&self, sigma: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let wd = 1usize << self.work;
        let mut w = 0;
        for (i, &b) in self.x.iter().enumerate() {
            if b {
                w |= 1 << (self.work - 1 - i);
            }
        }
        let mut e = vec![C64::new(0.0, 0.0); wd];
        e[w] = C64::new(1.0, 0.0);
        let rho = kron(&ComplexMatrix::outer(&e, &e), sigma);

        let reg = self.v.index_register();
        let width = self.v.registers().index_width();
        let nproof = self.v.registers().proof_qubits();
        let mut branches = vec![(rho, Vec::<usize>::new())];
        let mut last: &[GateSpec] = &[];
        for stage in self.v.stages() {
            match stage {
                Stage::Circuit(gates) => {
                    last = gates;
                    branches = branches
                        .into_iter()
                        .map(|(r, p)| Ok((Self::conj(&self.mapped(gates, &p), &r)?, p)))
                        .collect::<Result<_>>()?;
                }
                Stage::Query(count) => {
                    let mut next = Vec::new();
                    for (r, p) in branches {
                        for value in 0..1usize << reg.len() {
                            let val_of = |i: usize| reg.iter().fold(0, |acc, &qb| (acc << 1) | self.bit(i, qb));
                            let proj = Self::project(&r, |i| val_of(i) == value);
                            let mass = proj.trace().re;
                            if mass < 1e-14 {
                                continue;
                            }
                            let idx: Vec<usize> =
                                (0..count).map(|s| (value >> ((count - 1 - s) * width)) & ((1 << width) - 1)).collect();
                            let mut path = p.clone();
                            for &i in &idx {
                                if i >= nproof || path.contains(&i) {
                                    return Err(QpcpError::Structural(format!("invalid index outcome {idx:?}")));
                                }
                                path.push(i);
                            }
                            next.push((proj, path));
                        }
                    }
                    branches = next;
                }
            }
        }
        let keep: Vec<usize> = (self.work..self.total).collect();
        let out = self.v.output_qubit();
        let dim = sigma.rows();
        let (mut acc, mut rej) = (ComplexMatrix::zeros(dim, dim), ComplexMatrix::zeros(dim, dim));
        for (r, p) in branches {
            let on = Self::project(&r, |i| self.bit(i, out) == 1);
            let off = Self::project(&r, |i| self.bit(i, out) == 0);
            let undo = self.mapped(last, &p).adjoint();
            acc = acc.checked_add(&partial_trace_matrix(&Self::conj(&undo, &on)?, self.total, &keep)?)?;
            rej = rej.checked_add(&partial_trace_matrix(&off, self.total, &keep)?)?;
        }
        Ok((acc, rej))
    }
}

/// Runs the verifier `l` times in sequence on one proof copy, undoing the
/// final circuit after each acceptance, and accepts when the number of
/// accepting runs reaches (c + s)/2 · l.
pub fn strong_error_reduction<V: QueryVerifier + ?Sized>(
    v: &V,
    x: &[bool],
    xi: &DensityMatrix,
    l: usize,
    c: f64,
    s: f64,
    seed: &SeedStream,
) -> Result<StrongReduction> {
    check_gap(c, s)?;
    if l == 0 {
        return Err(QpcpError::InvalidParameter("l must be positive".into()));
    }
    if xi.num_qubits() != v.registers().proof_qubits() {
        return Err(QpcpError::DimensionMismatch(format!(
            "proof has {} qubits, verifier reads {}",
            xi.num_qubits(),
            v.registers().proof_qubits()
        )));
    }
    let inst = Instrument::new(v, x)?;
    let threshold = (c + s) / 2.0;
    let required = (threshold * l as f64 - 1e-12).ceil() as usize;

    // states[j]: unnormalized proof state after j accepting runs.
    let mut states = vec![xi.matrix().clone()];
    for _ in 0..l {
        let dim = xi.dim();
        let mut next = vec![ComplexMatrix::zeros(dim, dim); states.len() + 1];
        for (j, st) in states.iter().enumerate() {
            if st.trace().re < 1e-300 {
                continue;
            }
            let (acc, rej) = inst.apply(st)?;
            next[j + 1] = next[j + 1].checked_add(&acc)?;
            next[j] = next[j].checked_add(&rej)?;
        }
        states = next;
    }
    let dist: Vec<f64> = states.iter().map(|m| m.trace().re.max(0.0)).collect();
    let tail = |k: usize| dist.iter().skip(k).sum::<f64>().min(1.0);
    let mut avg = ComplexMatrix::zeros(xi.dim(), xi.dim());
    for st in &states {
        avg = avg.checked_add(st)?;
    }
    let disturbance = trace_distance(xi, &DensityMatrix::new(avg.hermitian_part())?)?;

    let mut rng = seed.child_rng("strong-reduction");
    let mut state = xi.matrix().clone();
    let mut accepts = 0;
    for _ in 0..l {
        let (acc, rej) = inst.apply(&state)?;
        let pa = acc.trace().re.clamp(0.0, 1.0);
        if rng.random::<f64>() < pa {
            accepts += 1;
            state = acc.scale_real(1.0 / pa);
        } else {
            state = rej.scale_real(1.0 / (1.0 - pa).max(1e-300));
        }
    }

    Ok(StrongReduction {
        runs: l,
        threshold,
        required_accepts: required,
        accept_probability: tail(required),
        majority_accept_probability: tail(l / 2 + 1),
        count_distribution: dist,
        disturbance,
        sampled_accepts: accepts,
        accept: accepts >= required,
    })
}
