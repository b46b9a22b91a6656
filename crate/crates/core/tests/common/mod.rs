#![allow(dead_code)]

use qpcp::circuit::{circuit_matrix, GateSpec};
use qpcp::linalg::{embed_operator, kron, ComplexMatrix, DensityMatrix, C64};
use qpcp::verifier::{QueryVerifier, Stage};

/// Acceptance probability by explicit density-matrix branching: every index
/// outcome projects an unnormalized ρ, gates act by conjugation.
pub fn branching_accept<V: QueryVerifier>(v: &V, x: &[bool], xi: &DensityMatrix) -> f64 {
    let regs = v.registers();
    let total = regs.total_qubits();
    let work = regs.work_qubits();
    let mut start = ComplexMatrix::zeros(1 << work, 1 << work);
    let idx = x.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize) << regs.p1;
    start.set(idx, idx, C64::new(1.0, 0.0));
    let rho = kron(&start, xi.matrix());
    let mut accept = 0.0;
    branch(v, &v.stages(), rho, &mut Vec::new(), total, work, &mut accept);
    accept
}

fn conj(u: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    &(u * rho) * &u.adjoint()
}

fn branch<V: QueryVerifier>(
    v: &V,
    stages: &[Stage<'_>],
    mut rho: ComplexMatrix,
    path: &mut Vec<usize>,
    total: usize,
    work: usize,
    accept: &mut f64,
) {
    let width = v.registers().index_width();
    for (si, stage) in stages.iter().enumerate() {
        match *stage {
            Stage::Circuit(gates) => {
                let mapped: Vec<GateSpec> =
                    gates.iter().map(|g| g.remap(|q| if q < work { q } else { work + path[q - work] })).collect();
                rho = conj(&circuit_matrix(&mapped, total), &rho);
            }
            Stage::Query(count) => {
                let reg = v.index_register().to_vec();
                for value in 0..1usize << reg.len() {
                    let mut ket = vec![C64::new(0.0, 0.0); 1 << reg.len()];
                    ket[value] = C64::new(1.0, 0.0);
                    let proj = embed_operator(&ComplexMatrix::outer(&ket, &ket), &reg, total).unwrap();
                    let next = &(&proj * &rho) * &proj;
                    let p = next.trace().re;
                    if p < 1e-14 {
                        continue;
                    }
                    let blocks: Vec<usize> =
                        (0..count).map(|s| (value >> ((count - 1 - s) * width)) & ((1 << width) - 1)).collect();
                    let depth = path.len();
                    path.extend(blocks);
                    branch(v, &stages[si + 1..], next, path, total, work, accept);
                    path.truncate(depth);
                }
                return;
            }
        }
    }
    let out = v.output_qubit();
    let one = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
    let p1 = embed_operator(&one, &[out], total).unwrap();
    *accept += (&p1 * &rho).trace().re;
}
