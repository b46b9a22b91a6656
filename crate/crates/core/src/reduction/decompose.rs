use serde::Serialize;

use crate::circuit::{apply_circuit, circuit_adjoint, Circuit, GateSpec};
use crate::error::{QpcpError, Result};
use crate::linalg::{check_cap, ComplexMatrix, Pauli, PauliWord, C64};
use crate::verifier::{QueryVerifier, Stage};

/// Signed {I, Z} words whose sum divided by 2^|bits| is |bits⟩⟨bits|.
pub fn projector_decomposition(bits: &[bool]) -> Vec<(f64, PauliWord)> {
    let w = bits.len();
    (0..1usize << w)
        .map(|mask| {
            let mut sign = 1.0;
            let letters = (0..w)
                .map(|r| {
                    if (mask >> (w - 1 - r)) & 1 == 1 {
                        if bits[r] {
                            sign = -sign;
                        }
                        Pauli::Z
                    } else {
                        Pauli::I
                    }
                })
                .collect();
            (sign, PauliWord::new(letters))
        })
        .collect()
}

#[derive(Clone, Debug)]
enum Factor {
    Gates(Circuit),
    Projector { qubits: Vec<usize>, bits: Vec<bool> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignedCircuit {
    pub sign: f64,
    pub circuit: Circuit,
}

/// P = (1/Γ) Σ_j a_j U_j with a_j = ±1, every U_j a circuit of verifier gates
/// and Z gates. Terms are produced on demand; there are Γ of them.
#[derive(Clone, Debug)]
pub struct UnitaryDecomposition {
    num_qubits: usize,
    factors: Vec<Factor>,
    radices: Vec<usize>,
    gamma: usize,
    gamma_formula: usize,
}

impl UnitaryDecomposition {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Number of signed circuits.
    pub fn gamma(&self) -> usize {
        self.gamma
    }

    /// 2^{q+1}(k·p2)^q, the count obtained when every index projector is padded.
    pub fn gamma_formula(&self) -> usize {
        self.gamma_formula
    }

    pub fn term(&self, j: usize) -> SignedCircuit {
        let mut rest = j;
        let mut sign = 1.0;
        let mut circuit = Vec::new();
        let mut p = 0;
        for f in &self.factors {
            match f {
                Factor::Gates(g) => circuit.extend(g.iter().cloned()),
                Factor::Projector { qubits, bits } => {
                    let w = qubits.len();
                    let mask = rest % self.radices[p];
                    rest /= self.radices[p];
                    p += 1;
                    for r in 0..w {
                        if (mask >> (w - 1 - r)) & 1 == 1 {
                            if bits[r] {
                                sign = -sign;
                            }
                            circuit.push(GateSpec::z(qubits[r]));
                        }
                    }
                }
            }
        }
        SignedCircuit { sign, circuit }
    }

    pub fn terms(&self) -> impl Iterator<Item = SignedCircuit> + '_ {
        (0..self.gamma).map(|j| self.term(j))
    }

    /// (1/Γ) Σ_j a_j U_j as a dense matrix.
    pub fn reassemble(&self) -> Result<ComplexMatrix> {
        check_cap(self.num_qubits)?;
        let dim = 1usize << self.num_qubits;
        let mut out = ComplexMatrix::zeros(dim, dim);
        for t in self.terms() {
            let scale = t.sign / self.gamma as f64;
            for col in 0..dim {
                let mut e = vec![C64::new(0.0, 0.0); dim];
                e[col] = C64::new(1.0, 0.0);
                apply_circuit(&t.circuit, &mut e, self.num_qubits);
                for (row, a) in e.into_iter().enumerate() {
                    out.add_at(row, col, a * scale);
                }
            }
        }
        Ok(out)
    }
}

/// Decomposition of the path operator on the full register `[A | B | C]`.
pub fn unitary_decomposition<V: QueryVerifier + ?Sized>(
    v: &V,
    x: &[bool],
    path: &[usize],
) -> Result<UnitaryDecomposition> {
    let regs = v.registers();
    let slots: Vec<usize> = path.iter().map(|&i| regs.work_qubits() + i).collect();
    decompose(v, x, path, regs.total_qubits(), &slots)
}

/// Decomposition on a register of `total` qubits where slot `s` is physical qubit `slots[s]`.
pub(crate) fn decompose<V: QueryVerifier + ?Sized>(
    v: &V,
    x: &[bool],
    path: &[usize],
    total: usize,
    slots: &[usize],
) -> Result<UnitaryDecomposition> {
    v.validate()?;
    crate::verifier::check_input(v, x)?;
    let regs = v.registers();
    let q = v.q();
    let nproof = regs.proof_qubits();
    if path.len() != q || path.iter().enumerate().any(|(s, &i)| i >= nproof || path[..s].contains(&i)) {
        return Err(QpcpError::MalformedPath(format!("{path:?} is not {q} distinct proof indices")));
    }
    let width = regs.index_width();
    let work = regs.work_qubits();
    let reg = v.index_register().to_vec();

    let mut forward =
        vec![Factor::Gates(x.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| GateSpec::x(i)).collect())];
    let mut filled = 0;
    for stage in v.stages() {
        match stage {
            Stage::Circuit(gates) => {
                let map = |qb: usize| if qb < work { qb } else { slots[qb - work] };
                forward.push(Factor::Gates(gates.iter().map(|g| g.remap(map)).collect()));
            }
            Stage::Query(count) => {
                let bits = path[filled..filled + count]
                    .iter()
                    .flat_map(|&i| (0..width).rev().map(move |b| (i >> b) & 1 == 1))
                    .collect();
                forward.push(Factor::Projector { qubits: reg.clone(), bits });
                filled += count;
            }
        }
    }
    // K†K with K = Π₀ · (forward product); Π₀ appears once since it is idempotent.
    let mut factors = forward.clone();
    factors.push(Factor::Projector { qubits: vec![v.output_qubit()], bits: vec![false] });
    for f in forward.iter().rev() {
        factors.push(match f {
            Factor::Gates(g) => Factor::Gates(circuit_adjoint(g)),
            p => p.clone(),
        });
    }
    let radices: Vec<usize> = factors
        .iter()
        .filter_map(|f| match f {
            Factor::Projector { qubits, .. } => Some(1usize << qubits.len()),
            Factor::Gates(_) => None,
        })
        .collect();
    let gamma = radices.iter().product();
    let gamma_formula = (1usize << (q + 1)) * nproof.pow(q as u32);
    Ok(UnitaryDecomposition { num_qubits: total, factors, radices, gamma, gamma_formula })
}
