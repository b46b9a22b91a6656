//! Quantum PCP verifiers as explicit circuit and measurement schedules.
//!
//! Gate targets use a virtual register `[A (n) | B (p1) | slots (q)]`. Slot `s`
//! stands for the proof qubit returned by the `s`-th index measurement, so a
//! circuit can act on an adaptively chosen proof qubit. Proof qubits are
//! numbered `(j, l) ↦ j·p2 + l` (0-based prover `j`, position `l`).

mod engine;
mod repeat;

pub use engine::{
    accept_probability_exact, exact_run, forced_reject_vector, path_distribution, path_operator, sample_run, ExactRun,
    PathLeaf, Sampler, PRUNE_THRESHOLD,
};
pub use repeat::{at_least, parallel_repeat, repetition_count, RepeatedVerifier};

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateSpec};
use crate::error::{QpcpError, Result};
use crate::linalg::ceil_log2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Registers {
    pub n: usize,
    pub p1: usize,
    pub k: usize,
    pub p2: usize,
}

impl Registers {
    pub fn proof_qubits(&self) -> usize {
        self.k * self.p2
    }

    /// Input plus ancilla qubits.
    pub fn work_qubits(&self) -> usize {
        self.n + self.p1
    }

    pub fn total_qubits(&self) -> usize {
        self.work_qubits() + self.proof_qubits()
    }

    /// Bits needed to name one proof qubit.
    pub fn index_width(&self) -> usize {
        ceil_log2(self.proof_qubits())
    }

    /// Proof-qubit index of position `l` in prover `j` (both 0-based).
    pub fn proof_index(&self, j: usize, l: usize) -> usize {
        j * self.p2 + l
    }
}

/// Ordered tuple of distinct proof-qubit indices with its probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryPath {
    pub indices: Vec<usize>,
    pub probability: f64,
}

/// A schedule step.
#[derive(Clone, Copy, Debug)]
pub enum Stage<'a> {
    Circuit(&'a [GateSpec]),
    /// Index measurement revealing `count` further proof indices at once.
    Query(usize),
}

pub trait QueryVerifier {
    fn registers(&self) -> Registers;
    fn q(&self) -> usize;
    fn index_register(&self) -> &[usize];
    fn output_qubit(&self) -> usize;
    fn stages(&self) -> Vec<Stage<'_>>;
    fn is_adaptive(&self) -> bool;

    /// Size of the virtual register `[A | B | slots]`.
    fn virtual_qubits(&self) -> usize {
        self.registers().work_qubits() + self.q()
    }

    /// Structural checks run before any simulation.
    fn validate(&self) -> Result<()> {
        validate_common(self)
    }
}

fn validate_common<V: QueryVerifier + ?Sized>(v: &V) -> Result<()> {
    let regs = v.registers();
    let q = v.q();
    let nproof = regs.proof_qubits();
    if q == 0 || q > nproof {
        return Err(QpcpError::Structural(format!("q = {q} with {nproof} proof qubits")));
    }
    let work = regs.work_qubits();
    if v.output_qubit() >= work {
        return Err(QpcpError::Structural(format!("output qubit {} lies outside registers A and B", v.output_qubit())));
    }
    let per_query = if v.is_adaptive() { 1 } else { q };
    let reg = v.index_register();
    if reg.len() != per_query * regs.index_width() {
        return Err(QpcpError::Structural(format!(
            "index register has {} qubits, expected {}",
            reg.len(),
            per_query * regs.index_width()
        )));
    }
    for (i, &r) in reg.iter().enumerate() {
        if r < regs.n || r >= work {
            return Err(QpcpError::Structural(format!("index register qubit {r} is not an ancilla")));
        }
        if i > 0 && r != reg[i - 1] + 1 {
            return Err(QpcpError::Structural("index register must be contiguous and ascending".into()));
        }
    }
    let mut filled = 0;
    for stage in v.stages() {
        match stage {
            Stage::Circuit(gates) => {
                for g in gates {
                    g.validate()?;
                    if let Some(&bad) = g.qubits().iter().find(|&&qb| qb >= work + filled) {
                        return Err(QpcpError::Structural(format!(
                            "gate touches qubit {bad} but only {filled} proof qubits have been queried"
                        )));
                    }
                }
            }
            Stage::Query(count) => filled += count,
        }
    }
    if filled != q {
        return Err(QpcpError::Structural(format!("schedule queries {filled} indices, q = {q}")));
    }
    Ok(())
}

/// Adaptive verifier: circuits V¹…V^{q+1} separated by single-index measurements.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveVerifier {
    pub registers: Registers,
    pub q: usize,
    pub circuits: Vec<Circuit>,
    pub index_register: Vec<usize>,
    pub output_qubit: usize,
}

impl AdaptiveVerifier {
    pub fn new(
        registers: Registers,
        q: usize,
        circuits: Vec<Circuit>,
        index_register: Vec<usize>,
        output_qubit: usize,
    ) -> Result<Self> {
        let v = Self { registers, q, circuits, index_register, output_qubit };
        v.validate()?;
        Ok(v)
    }
}

impl QueryVerifier for AdaptiveVerifier {
    fn registers(&self) -> Registers {
        self.registers
    }
    fn q(&self) -> usize {
        self.q
    }
    fn index_register(&self) -> &[usize] {
        &self.index_register
    }
    fn output_qubit(&self) -> usize {
        self.output_qubit
    }
    fn is_adaptive(&self) -> bool {
        true
    }
    fn stages(&self) -> Vec<Stage<'_>> {
        let mut out = Vec::with_capacity(2 * self.circuits.len());
        for (t, c) in self.circuits.iter().enumerate() {
            if t > 0 {
                out.push(Stage::Query(1));
            }
            out.push(Stage::Circuit(c));
        }
        out
    }
    fn validate(&self) -> Result<()> {
        if self.circuits.len() != self.q + 1 {
            return Err(QpcpError::Structural(format!("{} circuits for q = {}", self.circuits.len(), self.q)));
        }
        validate_common(self)
    }
}

/// Non-adaptive verifier: one circuit, one measurement of the whole q-tuple, one final circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct NonAdaptiveVerifier {
    pub registers: Registers,
    pub q: usize,
    pub prepare: Circuit,
    pub finish: Circuit,
    /// q blocks of `index_width` qubits; block `s` names slot `s`.
    pub index_register: Vec<usize>,
    pub output_qubit: usize,
}

impl NonAdaptiveVerifier {
    pub fn new(
        registers: Registers,
        q: usize,
        prepare: Circuit,
        finish: Circuit,
        index_register: Vec<usize>,
        output_qubit: usize,
    ) -> Result<Self> {
        let v = Self { registers, q, prepare, finish, index_register, output_qubit };
        v.validate()?;
        Ok(v)
    }
}

impl QueryVerifier for NonAdaptiveVerifier {
    fn registers(&self) -> Registers {
        self.registers
    }
    fn q(&self) -> usize {
        self.q
    }
    fn index_register(&self) -> &[usize] {
        &self.index_register
    }
    fn output_qubit(&self) -> usize {
        self.output_qubit
    }
    fn is_adaptive(&self) -> bool {
        false
    }
    fn stages(&self) -> Vec<Stage<'_>> {
        vec![Stage::Circuit(&self.prepare), Stage::Query(self.q), Stage::Circuit(&self.finish)]
    }
}

/// Either kind of verifier, as read from a spec file.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyVerifier {
    Adaptive(AdaptiveVerifier),
    NonAdaptive(NonAdaptiveVerifier),
}

impl AnyVerifier {
    fn inner(&self) -> &dyn QueryVerifier {
        match self {
            AnyVerifier::Adaptive(v) => v,
            AnyVerifier::NonAdaptive(v) => v,
        }
    }
}

impl From<AdaptiveVerifier> for AnyVerifier {
    fn from(v: AdaptiveVerifier) -> Self {
        AnyVerifier::Adaptive(v)
    }
}

impl From<NonAdaptiveVerifier> for AnyVerifier {
    fn from(v: NonAdaptiveVerifier) -> Self {
        AnyVerifier::NonAdaptive(v)
    }
}

impl QueryVerifier for AnyVerifier {
    fn registers(&self) -> Registers {
        self.inner().registers()
    }
    fn q(&self) -> usize {
        self.inner().q()
    }
    fn index_register(&self) -> &[usize] {
        self.inner().index_register()
    }
    fn output_qubit(&self) -> usize {
        self.inner().output_qubit()
    }
    fn stages(&self) -> Vec<Stage<'_>> {
        self.inner().stages()
    }
    fn is_adaptive(&self) -> bool {
        self.inner().is_adaptive()
    }
    fn validate(&self) -> Result<()> {
        self.inner().validate()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Adaptive,
    Nonadaptive,
}

/// On-disk verifier description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifierSpec {
    pub n: usize,
    pub p1: usize,
    pub k: usize,
    pub p2: usize,
    pub q: usize,
    #[serde(default, skip_serializing_if = "is_adaptive_mode")]
    pub mode: Mode,
    pub index_register: Vec<usize>,
    pub output_qubit: usize,
    pub circuits: Vec<Circuit>,
}

fn is_adaptive_mode(m: &Mode) -> bool {
    *m == Mode::Adaptive
}

impl VerifierSpec {
    pub fn build(self) -> Result<AnyVerifier> {
        let registers = Registers { n: self.n, p1: self.p1, k: self.k, p2: self.p2 };
        match self.mode {
            Mode::Adaptive => Ok(AnyVerifier::Adaptive(AdaptiveVerifier::new(
                registers,
                self.q,
                self.circuits,
                self.index_register,
                self.output_qubit,
            )?)),
            Mode::Nonadaptive => {
                let mut circuits = self.circuits.into_iter();
                let (Some(prepare), Some(finish), None) = (circuits.next(), circuits.next(), circuits.next()) else {
                    return Err(QpcpError::Structural("a non-adaptive verifier has exactly two circuits".into()));
                };
                Ok(AnyVerifier::NonAdaptive(NonAdaptiveVerifier::new(
                    registers,
                    self.q,
                    prepare,
                    finish,
                    self.index_register,
                    self.output_qubit,
                )?))
            }
        }
    }

    pub fn from_json(text: &str) -> Result<AnyVerifier> {
        serde_json::from_str::<VerifierSpec>(text)?.build()
    }
}

impl From<&AdaptiveVerifier> for VerifierSpec {
    fn from(v: &AdaptiveVerifier) -> Self {
        let r = v.registers;
        Self {
            n: r.n,
            p1: r.p1,
            k: r.k,
            p2: r.p2,
            q: v.q,
            mode: Mode::Adaptive,
            index_register: v.index_register.clone(),
            output_qubit: v.output_qubit,
            circuits: v.circuits.clone(),
        }
    }
}

impl From<&NonAdaptiveVerifier> for VerifierSpec {
    fn from(v: &NonAdaptiveVerifier) -> Self {
        let r = v.registers;
        Self {
            n: r.n,
            p1: r.p1,
            k: r.k,
            p2: r.p2,
            q: v.q,
            mode: Mode::Nonadaptive,
            index_register: v.index_register.clone(),
            output_qubit: v.output_qubit,
            circuits: vec![v.prepare.clone(), v.finish.clone()],
        }
    }
}

impl From<&AnyVerifier> for VerifierSpec {
    fn from(v: &AnyVerifier) -> Self {
        match v {
            AnyVerifier::Adaptive(a) => a.into(),
            AnyVerifier::NonAdaptive(na) => na.into(),
        }
    }
}

/// Gates realizing the hardcoded input: X on every A qubit whose bit is set.
pub(crate) fn input_gates(x: &[bool]) -> Circuit {
    x.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| GateSpec::x(i)).collect()
}

pub(crate) fn check_input<V: QueryVerifier + ?Sized>(v: &V, x: &[bool]) -> Result<()> {
    if x.len() != v.registers().n {
        return Err(QpcpError::InvalidParameter(format!(
            "input has {} bits, verifier expects {}",
            x.len(),
            v.registers().n
        )));
    }
    Ok(())
}
