//! Gates, circuits and statevector kernels.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{QpcpError, Result};
use crate::linalg::{deposit, ComplexMatrix, C64};

pub const UNITARY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NamedGate {
    H,
    X,
    Y,
    Z,
    S,
    T,
    CNOT,
    CZ,
}

impl NamedGate {
    pub fn arity(self) -> usize {
        match self {
            NamedGate::CNOT | NamedGate::CZ => 2,
            _ => 1,
        }
    }

    pub fn matrix(self) -> ComplexMatrix {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        match self {
            NamedGate::H => ComplexMatrix::from_rows(&[vec![h, h], vec![h, -h]]),
            NamedGate::X => ComplexMatrix::from_rows(&[vec![o, l], vec![l, o]]),
            NamedGate::Y => ComplexMatrix::from_rows(&[vec![o, -i], vec![i, o]]),
            NamedGate::Z => ComplexMatrix::from_rows(&[vec![l, o], vec![o, -l]]),
            NamedGate::S => ComplexMatrix::from_rows(&[vec![l, o], vec![o, i]]),
            NamedGate::T => {
                ComplexMatrix::from_rows(&[vec![l, o], vec![o, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]])
            }
            NamedGate::CNOT => {
                ComplexMatrix::from_rows(&[vec![l, o, o, o], vec![o, l, o, o], vec![o, o, o, l], vec![o, o, l, o]])
            }
            NamedGate::CZ => ComplexMatrix::from_real_diag(&[1.0, 1.0, 1.0, -1.0]),
        }
    }

    fn self_inverse(self) -> bool {
        !matches!(self, NamedGate::S | NamedGate::T)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    Named(NamedGate),
    Unitary(ComplexMatrix),
    /// Applies `cases[k].1` to the targets when the control register reads `cases[k].0`,
    /// and the identity for any value without a case.
    Multiplexed {
        controls: Vec<usize>,
        cases: Vec<(usize, ComplexMatrix)>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateSpec {
    pub targets: Vec<usize>,
    pub kind: GateKind,
}

pub type Circuit = Vec<GateSpec>;

impl GateSpec {
    pub fn named(gate: NamedGate, targets: Vec<usize>) -> Self {
        Self { targets, kind: GateKind::Named(gate) }
    }

    pub fn unitary(matrix: ComplexMatrix, targets: Vec<usize>) -> Self {
        Self { targets, kind: GateKind::Unitary(matrix) }
    }

    pub fn multiplexed(controls: Vec<usize>, cases: Vec<(usize, ComplexMatrix)>, targets: Vec<usize>) -> Self {
        Self { targets, kind: GateKind::Multiplexed { controls, cases } }
    }

    pub fn x(q: usize) -> Self {
        Self::named(NamedGate::X, vec![q])
    }

    pub fn z(q: usize) -> Self {
        Self::named(NamedGate::Z, vec![q])
    }

    /// Every qubit the gate reads or writes.
    pub fn qubits(&self) -> Vec<usize> {
        let mut qs = self.targets.clone();
        if let GateKind::Multiplexed { controls, .. } = &self.kind {
            qs.extend(controls);
        }
        qs
    }

    pub fn validate(&self) -> Result<()> {
        let qs = self.qubits();
        for (i, q) in qs.iter().enumerate() {
            if qs[..i].contains(q) {
                return Err(QpcpError::Structural(format!("gate lists qubit {q} twice")));
            }
        }
        let dim = 1usize << self.targets.len();
        let check = |m: &ComplexMatrix| -> Result<()> {
            if m.rows() != dim || m.cols() != dim {
                return Err(QpcpError::Structural(format!(
                    "gate matrix of size {} on {} targets",
                    m.rows(),
                    self.targets.len()
                )));
            }
            if !m.is_unitary(UNITARY_TOL) {
                return Err(QpcpError::Structural("gate matrix is not unitary within 1e-9".into()));
            }
            Ok(())
        };
        match &self.kind {
            GateKind::Named(g) => {
                if g.arity() != self.targets.len() {
                    return Err(QpcpError::Structural(format!(
                        "{g:?} takes {} targets, got {}",
                        g.arity(),
                        self.targets.len()
                    )));
                }
            }
            GateKind::Unitary(m) => check(m)?,
            GateKind::Multiplexed { controls, cases } => {
                let limit = 1usize << controls.len();
                for (i, (v, m)) in cases.iter().enumerate() {
                    if *v >= limit {
                        return Err(QpcpError::Structural(format!(
                            "control value {v} needs more than {} bits",
                            controls.len()
                        )));
                    }
                    if cases[..i].iter().any(|(w, _)| w == v) {
                        return Err(QpcpError::Structural(format!("control value {v} listed twice")));
                    }
                    check(m)?;
                }
            }
        }
        Ok(())
    }

    /// Inverse gate.
    pub fn adjoint(&self) -> Self {
        let kind = match &self.kind {
            GateKind::Named(g) if g.self_inverse() => GateKind::Named(*g),
            GateKind::Named(g) => GateKind::Unitary(g.matrix().adjoint()),
            GateKind::Unitary(m) => GateKind::Unitary(m.adjoint()),
            GateKind::Multiplexed { controls, cases } => GateKind::Multiplexed {
                controls: controls.clone(),
                cases: cases.iter().map(|(v, m)| (*v, m.adjoint())).collect(),
            },
        };
        Self { targets: self.targets.clone(), kind }
    }

    /// Relabels every qubit through `f`.
    pub fn remap(&self, f: impl Fn(usize) -> usize) -> Self {
        let kind = match &self.kind {
            GateKind::Multiplexed { controls, cases } => {
                GateKind::Multiplexed { controls: controls.iter().map(|&q| f(q)).collect(), cases: cases.clone() }
            }
            other => other.clone(),
        };
        Self { targets: self.targets.iter().map(|&q| f(q)).collect(), kind }
    }

    /// The same gate conditioned on qubit `control` reading `value`.
    pub fn controlled(&self, control: usize, value: bool) -> Self {
        let bit = usize::from(value);
        match &self.kind {
            GateKind::Named(g) => Self::multiplexed(vec![control], vec![(bit, g.matrix())], self.targets.clone()),
            GateKind::Unitary(m) => Self::multiplexed(vec![control], vec![(bit, m.clone())], self.targets.clone()),
            GateKind::Multiplexed { controls, cases } => {
                let shift = controls.len();
                let mut all = vec![control];
                all.extend(controls);
                let cases = cases.iter().map(|(v, m)| ((bit << shift) | v, m.clone())).collect();
                Self::multiplexed(all, cases, self.targets.clone())
            }
        }
    }

    /// Dense matrix on `targets` (controls excluded); `None` for multiplexed gates.
    pub fn target_matrix(&self) -> Option<ComplexMatrix> {
        match &self.kind {
            GateKind::Named(g) => Some(g.matrix()),
            GateKind::Unitary(m) => Some(m.clone()),
            GateKind::Multiplexed { .. } => None,
        }
    }

    /// Applies the gate in place to an `n`-qubit amplitude vector.
    pub fn apply(&self, amps: &mut [C64], n: usize) {
        self.apply_mapped(amps, n, &|q| q);
    }

    /// Applies the gate with every qubit label sent through `map` first.
    pub fn apply_mapped(&self, amps: &mut [C64], n: usize, map: &dyn Fn(usize) -> usize) {
        let targets: Vec<usize> = self.targets.iter().map(|&q| map(q)).collect();
        match &self.kind {
            GateKind::Named(NamedGate::X) => apply_x(amps, targets[0], n),
            GateKind::Named(NamedGate::Z) => apply_z(amps, targets[0], n),
            GateKind::Named(g) => apply_dense(amps, n, &targets, &g.matrix(), 0, 0),
            GateKind::Unitary(m) => apply_dense(amps, n, &targets, m, 0, 0),
            GateKind::Multiplexed { controls, cases } => {
                let controls: Vec<usize> = controls.iter().map(|&q| map(q)).collect();
                let cmask = deposit((1 << controls.len()) - 1, &controls, n);
                for (v, m) in cases {
                    apply_dense(amps, n, &targets, m, cmask, deposit(*v, &controls, n));
                }
            }
        }
    }
}

fn apply_x(amps: &mut [C64], q: usize, n: usize) {
    let bit = 1usize << (n - 1 - q);
    for i in 0..amps.len() {
        if i & bit == 0 {
            amps.swap(i, i | bit);
        }
    }
}

fn apply_z(amps: &mut [C64], q: usize, n: usize) {
    let bit = 1usize << (n - 1 - q);
    for (i, a) in amps.iter_mut().enumerate() {
        if i & bit != 0 {
            *a = -*a;
        }
    }
}

/// Applies `m` on `targets` to every basis block whose `cmask` bits equal `cval`.
fn apply_dense(amps: &mut [C64], n: usize, targets: &[usize], m: &ComplexMatrix, cmask: usize, cval: usize) {
    let local = 1usize << targets.len();
    let offsets: Vec<usize> = (0..local).map(|r| deposit(r, targets, n)).collect();
    let tmask = offsets[local - 1];
    let skip = tmask | cmask;
    let mut buf = vec![C64::new(0.0, 0.0); local];
    let data = m.data();
    for base in 0..amps.len() {
        if base & skip != cval {
            continue;
        }
        for (r, b) in buf.iter_mut().enumerate() {
            *b = amps[base | offsets[r]];
        }
        for r in 0..local {
            let row = &data[r * local..(r + 1) * local];
            amps[base | offsets[r]] = row.iter().zip(&buf).map(|(a, b)| a * b).sum();
        }
    }
}

pub fn apply_circuit(gates: &[GateSpec], amps: &mut [C64], n: usize) {
    for g in gates {
        g.apply(amps, n);
    }
}

/// Inverse circuit (reversed order, each gate inverted).
pub fn circuit_adjoint(gates: &[GateSpec]) -> Circuit {
    gates.iter().rev().map(GateSpec::adjoint).collect()
}

/// Dense unitary of a circuit on `n` qubits, built column by column.
pub fn circuit_matrix(gates: &[GateSpec], n: usize) -> ComplexMatrix {
    let dim = 1usize << n;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[col] = C64::new(1.0, 0.0);
        apply_circuit(gates, &mut v, n);
        for (row, a) in v.into_iter().enumerate() {
            out.set(row, col, a);
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct CaseJson {
    value: usize,
    unitary: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct MultiplexedJson {
    controls: Vec<usize>,
    cases: Vec<CaseJson>,
}

#[derive(Serialize, Deserialize)]
struct GateJson {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    gate: Option<NamedGate>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    unitary: Option<ComplexMatrix>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    multiplexed: Option<MultiplexedJson>,
    targets: Vec<usize>,
}

impl Serialize for GateSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut j = GateJson { gate: None, unitary: None, multiplexed: None, targets: self.targets.clone() };
        match &self.kind {
            GateKind::Named(g) => j.gate = Some(*g),
            GateKind::Unitary(m) => j.unitary = Some(m.clone()),
            GateKind::Multiplexed { controls, cases } => {
                j.multiplexed = Some(MultiplexedJson {
                    controls: controls.clone(),
                    cases: cases.iter().map(|(v, m)| CaseJson { value: *v, unitary: m.clone() }).collect(),
                })
            }
        }
        j.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GateSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = GateJson::deserialize(d)?;
        let kind = match (j.gate, j.unitary, j.multiplexed) {
            (Some(g), None, None) => GateKind::Named(g),
            (None, Some(m), None) => GateKind::Unitary(m),
            (None, None, Some(mx)) => GateKind::Multiplexed {
                controls: mx.controls,
                cases: mx.cases.into_iter().map(|c| (c.value, c.unitary)).collect(),
            },
            _ => {
                return Err(serde::de::Error::custom(
                    "gate needs exactly one of \"gate\", \"unitary\" or \"multiplexed\"",
                ))
            }
        };
        Ok(GateSpec { targets: j.targets, kind })
    }
}

/// Gates preparing Σ_v a_v |v⟩ from |0…0⟩ on `qubits`, for real nonnegative amplitudes
/// with unit norm. Built as a cascade of multiplexed Y rotations.
pub fn prepare_real_amplitudes(amplitudes: &[f64], qubits: &[usize]) -> Circuit {
    let w = qubits.len();
    assert_eq!(amplitudes.len(), 1 << w, "amplitude count must match the register");
    let probs: Vec<f64> = amplitudes.iter().map(|a| a * a).collect();
    let mut gates = Vec::new();
    for level in 0..w {
        // Mass of each prefix of length `level` and of its two extensions.
        let block = 1usize << (w - level);
        let mut cases = Vec::new();
        for prefix in 0..1usize << level {
            let start = prefix * block;
            let half = block / 2;
            let m0: f64 = probs[start..start + half].iter().sum();
            let m1: f64 = probs[start + half..start + block].iter().sum();
            let total = m0 + m1;
            if total <= 0.0 || m1 <= 0.0 {
                continue;
            }
            let c = (m0 / total).sqrt();
            let s = (m1 / total).sqrt();
            let rot = ComplexMatrix::from_rows(&[
                vec![C64::new(c, 0.0), C64::new(-s, 0.0)],
                vec![C64::new(s, 0.0), C64::new(c, 0.0)],
            ]);
            cases.push((prefix, rot));
        }
        if cases.is_empty() {
            continue;
        }
        let target = vec![qubits[level]];
        if level == 0 {
            gates.push(GateSpec::unitary(cases.pop().unwrap().1, target));
        } else {
            gates.push(GateSpec::multiplexed(qubits[..level].to_vec(), cases, target));
        }
    }
    gates
}
