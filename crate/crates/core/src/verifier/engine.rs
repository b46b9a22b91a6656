use std::collections::BTreeMap;

use rand::Rng;

use super::{check_input, input_gates, QueryPath, QueryVerifier, Stage};
use crate::circuit::apply_circuit;
use crate::error::{QpcpError, Result};
use crate::linalg::{check_cap, ComplexMatrix, DensityMatrix, C64};

/// Branches whose absolute probability falls below this are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

const ENSEMBLE_CUTOFF: f64 = 1e-15;

/// One fully resolved query path.
#[derive(Clone, Debug, PartialEq)]
pub struct PathLeaf {
    pub path: Vec<usize>,
    pub probability: f64,
    /// Joint probability of this path and acceptance.
    pub accept: f64,
}

/// Outcome of exact branching over every index measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactRun {
    pub accept: f64,
    pub leaves: Vec<PathLeaf>,
    pub pruned: f64,
}

impl ExactRun {
    /// Total branch mass, kept and pruned.
    pub fn total_probability(&self) -> f64 {
        self.leaves.iter().map(|l| l.probability).sum::<f64>() + self.pruned
    }

    pub fn paths(&self) -> Vec<QueryPath> {
        self.leaves.iter().map(|l| QueryPath { indices: l.path.clone(), probability: l.probability }).collect()
    }
}

/// Fixed facts about a verifier simulated on the full register `[A | B | C]`.
struct Layout {
    total: usize,
    work: usize,
    nproof: usize,
    width: usize,
    reg_shift: usize,
    reg_len: usize,
    out_bit: usize,
}

impl Layout {
    fn new<V: QueryVerifier + ?Sized>(v: &V, total: usize) -> Self {
        let regs = v.registers();
        let reg = v.index_register();
        let reg_len = reg.len();
        let reg_shift = if reg_len == 0 { 0 } else { total - reg[0] - reg_len };
        Self {
            total,
            work: regs.work_qubits(),
            nproof: regs.proof_qubits(),
            width: regs.index_width(),
            reg_shift,
            reg_len,
            out_bit: 1 << (total - 1 - v.output_qubit()),
        }
    }

    #[inline]
    fn register_value(&self, i: usize) -> usize {
        (i >> self.reg_shift) & ((1usize << self.reg_len) - 1)
    }

    fn decode(&self, value: usize, count: usize) -> Vec<usize> {
        let mask = (1usize << self.width) - 1;
        (0..count).map(|s| (value >> ((count - 1 - s) * self.width)) & mask).collect()
    }

    fn encode(&self, indices: &[usize]) -> usize {
        indices.iter().fold(0, |acc, &i| (acc << self.width) | i)
    }

    /// Slot `s` is physical qubit `offset + slots[s]`.
    fn apply(&self, gates: &[crate::circuit::GateSpec], amps: &mut [C64], slots: &[usize], offset: usize) {
        let work = self.work;
        let map = |q: usize| if q < work { q } else { offset + slots[q - work] };
        for g in gates {
            g.apply_mapped(amps, self.total, &map);
        }
    }

    fn outcome_probabilities(&self, amps: &[C64]) -> Vec<f64> {
        let mut probs = vec![0.0; 1 << self.reg_len];
        for (i, a) in amps.iter().enumerate() {
            probs[self.register_value(i)] += a.norm_sqr();
        }
        probs
    }

    fn project(&self, amps: &[C64], value: usize, scale: f64) -> Vec<C64> {
        amps.iter()
            .enumerate()
            .map(|(i, a)| if self.register_value(i) == value { a * scale } else { C64::new(0.0, 0.0) })
            .collect()
    }

    fn accept_mass(&self, amps: &[C64]) -> f64 {
        amps.iter().enumerate().filter(|(i, _)| i & self.out_bit != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    fn check_outcome(&self, indices: &[usize], path: &[usize], probability: f64) -> Result<()> {
        for (s, &i) in indices.iter().enumerate() {
            if i >= self.nproof || path.contains(&i) || indices[..s].contains(&i) {
                return Err(QpcpError::Structural(format!(
                    "index outcome {indices:?} after path {path:?} is invalid or repeats a queried qubit yet has probability {probability:.3e}"
                )));
            }
        }
        Ok(())
    }
}

fn initial_amplitudes(layout: &Layout, proof: &[C64], x_gates: &[crate::circuit::GateSpec]) -> Vec<C64> {
    let mut amps = vec![C64::new(0.0, 0.0); 1 << layout.total];
    amps[..proof.len()].copy_from_slice(proof);
    apply_circuit(x_gates, &mut amps, layout.total);
    amps
}

fn check_proof<V: QueryVerifier + ?Sized>(v: &V, xi: &DensityMatrix) -> Result<()> {
    let expected = v.registers().proof_qubits();
    if xi.num_qubits() != expected {
        return Err(QpcpError::DimensionMismatch(format!(
            "proof has {} qubits, verifier reads {expected}",
            xi.num_qubits()
        )));
    }
    Ok(())
}

struct Accum {
    leaves: BTreeMap<Vec<usize>, (f64, f64)>,
    pruned: f64,
}

fn explore(
    layout: &Layout,
    stages: &[Stage<'_>],
    mut amps: Vec<C64>,
    weight: f64,
    path: &mut Vec<usize>,
    acc: &mut Accum,
) -> Result<()> {
    for (si, stage) in stages.iter().enumerate() {
        match *stage {
            Stage::Circuit(gates) => layout.apply(gates, &mut amps, path, layout.work),
            Stage::Query(count) => {
                let probs = layout.outcome_probabilities(&amps);
                for (value, &p) in probs.iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    let absolute = weight * p;
                    if absolute < PRUNE_THRESHOLD {
                        acc.pruned += absolute;
                        continue;
                    }
                    let indices = layout.decode(value, count);
                    layout.check_outcome(&indices, path, absolute)?;
                    let branch = layout.project(&amps, value, 1.0 / p.sqrt());
                    let depth = path.len();
                    path.extend(&indices);
                    explore(layout, &stages[si + 1..], branch, absolute, path, acc)?;
                    path.truncate(depth);
                }
                return Ok(());
            }
        }
    }
    let entry = acc.leaves.entry(path.clone()).or_insert((0.0, 0.0));
    entry.0 += weight;
    entry.1 += weight * layout.accept_mass(&amps);
    Ok(())
}

/// Branches over all index outcomes for every eigencomponent of ξ.
pub fn exact_run<V: QueryVerifier + ?Sized>(v: &V, x: &[bool], xi: &DensityMatrix) -> Result<ExactRun> {
    check_input(v, x)?;
    check_proof(v, xi)?;
    let regs = v.registers();
    check_cap(regs.total_qubits())?;
    let layout = Layout::new(v, regs.total_qubits());
    let stages = v.stages();
    let x_gates = input_gates(x);
    let mut acc = Accum { leaves: BTreeMap::new(), pruned: 0.0 };
    for (p, psi) in xi.ensemble(ENSEMBLE_CUTOFF)? {
        let amps = initial_amplitudes(&layout, &psi, &x_gates);
        explore(&layout, &stages, amps, p, &mut Vec::new(), &mut acc)?;
    }
    let leaves: Vec<PathLeaf> =
        acc.leaves.into_iter().map(|(path, (probability, accept))| PathLeaf { path, probability, accept }).collect();
    let accept = leaves.iter().map(|l| l.accept).sum::<f64>().clamp(0.0, 1.0);
    Ok(ExactRun { accept, leaves, pruned: acc.pruned })
}

pub fn accept_probability_exact<V: QueryVerifier + ?Sized>(v: &V, x: &[bool], xi: &DensityMatrix) -> Result<f64> {
    Ok(exact_run(v, x, xi)?.accept)
}

pub fn path_distribution<V: QueryVerifier + ?Sized>(v: &V, x: &[bool], xi: &DensityMatrix) -> Result<Vec<QueryPath>> {
    Ok(exact_run(v, x, xi)?.paths())
}

/// Monte-Carlo runner that decomposes ξ once and reuses it across runs.
pub struct Sampler<'a, V: ?Sized> {
    v: &'a V,
    layout: Layout,
    stages: Vec<Stage<'a>>,
    ensemble: Vec<(f64, Vec<C64>)>,
    x_gates: crate::circuit::Circuit,
}

impl<'a, V: QueryVerifier + ?Sized> Sampler<'a, V> {
    pub fn new(v: &'a V, x: &[bool], xi: &DensityMatrix) -> Result<Self> {
        check_input(v, x)?;
        check_proof(v, xi)?;
        let regs = v.registers();
        check_cap(regs.total_qubits())?;
        Ok(Self {
            v,
            layout: Layout::new(v, regs.total_qubits()),
            stages: v.stages(),
            ensemble: xi.ensemble(ENSEMBLE_CUTOFF)?,
            x_gates: input_gates(x),
        })
    }

    /// One run. The returned path probability is conditional on the
    /// eigencomponent of ξ that was drawn (it is exact for pure proofs).
    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(QueryPath, bool)> {
        let layout = &self.layout;
        let psi = pick(&self.ensemble, rng.random::<f64>());
        let mut amps = initial_amplitudes(layout, psi, &self.x_gates);
        let mut path = Vec::with_capacity(self.v.q());
        let mut probability = 1.0;
        for stage in &self.stages {
            match *stage {
                Stage::Circuit(gates) => layout.apply(gates, &mut amps, &path, layout.work),
                Stage::Query(count) => {
                    let probs = layout.outcome_probabilities(&amps);
                    let total: f64 = probs.iter().sum();
                    let mut u = rng.random::<f64>() * total;
                    let mut value = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
                    for (k, &p) in probs.iter().enumerate() {
                        if u < p {
                            value = k;
                            break;
                        }
                        u -= p;
                    }
                    let p = probs[value];
                    let indices = layout.decode(value, count);
                    layout.check_outcome(&indices, &path, p)?;
                    amps = layout.project(&amps, value, 1.0 / p.sqrt());
                    probability *= p / total;
                    path.extend(indices);
                }
            }
        }
        let accept = rng.random::<f64>() < layout.accept_mass(&amps);
        Ok((QueryPath { indices: path, probability }, accept))
    }

    /// Number of accepting runs out of `shots`.
    pub fn count_accepts<R: Rng + ?Sized>(&self, shots: usize, rng: &mut R) -> Result<usize> {
        let mut n = 0;
        for _ in 0..shots {
            n += self.run(rng)?.1 as usize;
        }
        Ok(n)
    }
}

/// One Monte-Carlo run; see [`Sampler::run`].
pub fn sample_run<V: QueryVerifier + ?Sized, R: Rng + ?Sized>(
    v: &V,
    x: &[bool],
    xi: &DensityMatrix,
    rng: &mut R,
) -> Result<(QueryPath, bool)> {
    Sampler::new(v, x, xi)?.run(rng)
}

fn pick(ensemble: &[(f64, Vec<C64>)], u: f64) -> &[C64] {
    let total: f64 = ensemble.iter().map(|(p, _)| p).sum();
    let mut u = u * total;
    for (p, psi) in ensemble {
        if u < *p {
            return psi;
        }
        u -= p;
    }
    &ensemble.last().expect("a state has a nonzero eigenvalue").1
}

fn check_path<V: QueryVerifier + ?Sized>(v: &V, path: &[usize]) -> Result<()> {
    let nproof = v.registers().proof_qubits();
    if path.len() != v.q() {
        return Err(QpcpError::MalformedPath(format!("path {path:?} has length {}, q = {}", path.len(), v.q())));
    }
    for (s, &i) in path.iter().enumerate() {
        if i >= nproof {
            return Err(QpcpError::MalformedPath(format!("index {i} out of range for {nproof} proof qubits")));
        }
        if path[..s].contains(&i) {
            return Err(QpcpError::MalformedPath(format!("index {i} repeats")));
        }
    }
    Ok(())
}

/// Π₀ V^{q+1} M_q ⋯ M₁ applied to `input` on a register of `total` qubits, where
/// slot `s` lives at physical qubit `slots[s]` and `path` fixes the index outcomes.
pub fn forced_reject_vector<V: QueryVerifier + ?Sized>(
    v: &V,
    x: &[bool],
    input: &[C64],
    total: usize,
    slots: &[usize],
    path: &[usize],
) -> Vec<C64> {
    let layout = Layout::new(v, total);
    let mut amps = input.to_vec();
    apply_circuit(&input_gates(x), &mut amps, total);
    let mut filled = 0;
    for stage in v.stages() {
        match stage {
            Stage::Circuit(gates) => layout.apply(gates, &mut amps, &slots[..filled], 0),
            Stage::Query(count) => {
                let value = layout.encode(&path[filled..filled + count]);
                amps = layout.project(&amps, value, 1.0);
                filled += count;
            }
        }
    }
    for (i, a) in amps.iter_mut().enumerate() {
        if i & layout.out_bit != 0 {
            *a = C64::new(0.0, 0.0);
        }
    }
    amps
}

/// Full-space path operator M₁†⋯M_q† V^{q+1}† Π₀ V^{q+1} M_q⋯M₁.
pub fn path_operator<V: QueryVerifier + ?Sized>(v: &V, x: &[bool], path: &[usize]) -> Result<ComplexMatrix> {
    v.validate()?;
    check_input(v, x)?;
    check_path(v, path)?;
    let regs = v.registers();
    let total = regs.total_qubits();
    check_cap(total)?;
    let work = regs.work_qubits();
    let slots: Vec<usize> = path.iter().map(|&i| work + i).collect();
    let dim = 1usize << total;
    let mut k = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut e = vec![C64::new(0.0, 0.0); dim];
        e[col] = C64::new(1.0, 0.0);
        for (row, a) in forced_reject_vector(v, x, &e, total, &slots, path).into_iter().enumerate() {
            k.set(row, col, a);
        }
    }
    Ok(&k.adjoint() * &k)
}
