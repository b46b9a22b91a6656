mod common;

use qpcp::fixtures::{accept_always, copy_verifier, random_adaptive, random_nonadaptive, reject_always};
use qpcp::linalg::random::{random_density, random_pure_state};
use qpcp::linalg::{hermitian_eigenvalues, trace_norm, DensityMatrix};
use qpcp::reduction::{exact_hamiltonian, unitary_decomposition};
use qpcp::rng::SeedStream;
use qpcp::verifier::{accept_probability_exact, exact_run, path_operator, QueryVerifier, Registers};

fn zero_input_state(v: &impl QueryVerifier, xi: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::basis(v.registers().work_qubits(), 0).tensor(xi)
}

#[test]
fn reject_always_has_unit_energy() {
    let v = reject_always(1, 2, 1).unwrap();
    let h = exact_hamiltonian(&v, &[]).unwrap();
    let eig = hermitian_eigenvalues(&h.assemble().unwrap()).unwrap();
    assert!(eig.iter().all(|e| (e - 1.0).abs() < 1e-12), "{eig:?}");
}

#[test]
fn accept_always_has_zero_hamiltonian() {
    let v = accept_always(1, 3, 2).unwrap();
    let h = exact_hamiltonian(&v, &[]).unwrap();
    assert!(trace_norm(&h.assemble().unwrap()).unwrap() < 1e-12);
}

#[test]
fn copy_verifier_reads_the_queried_qubit() {
    let v = copy_verifier(1, 2, 1).unwrap();
    let xi = DensityMatrix::basis(2, 0b01);
    assert!((accept_probability_exact(&v, &[], &xi).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn engine_matches_density_matrix_branching() {
    let seed = SeedStream::new(11);
    for (i, (k, p2, q, n, p1)) in
        [(1, 2, 1, 1, 3), (1, 3, 2, 1, 3), (2, 2, 2, 0, 3), (1, 2, 2, 2, 2)].into_iter().enumerate()
    {
        let mut rng = seed.child_rng(format!("case={i}"));
        let regs = Registers { n, p1, k, p2 };
        let v = random_adaptive(regs, q, &mut rng).unwrap();
        let x: Vec<bool> = (0..n).map(|b| b % 2 == 0).collect();
        let xi = random_density(k * p2, 2, &mut rng);
        let exact = accept_probability_exact(&v, &x, &xi).unwrap();
        let oracle = common::branching_accept(&v, &x, &xi);
        assert!((exact - oracle).abs() < 1e-9, "case {i}: {exact} vs {oracle}");
    }
}

#[test]
fn branch_mass_is_one() {
    let mut rng = SeedStream::new(5).rng();
    let v = random_adaptive(Registers { n: 1, p1: 3, k: 2, p2: 2 }, 2, &mut rng).unwrap();
    let xi = random_density(4, 4, &mut rng);
    let run = exact_run(&v, &[true], &xi).unwrap();
    assert!((run.total_probability() - 1.0).abs() < 1e-9);
}

#[test]
fn energy_identity_on_random_verifiers() {
    let seed = SeedStream::new(3);
    for i in 0..6 {
        let mut rng = seed.child_rng(format!("v={i}"));
        let q = 1 + i % 2;
        let regs = Registers { n: 1, p1: 4, k: 1 + i % 2, p2: 2 + (i / 2) % 2 };
        let v = random_adaptive(regs, q, &mut rng).unwrap();
        let h = exact_hamiltonian(&v, &[true]).unwrap();
        assert!(h.is_psd(1e-9).unwrap());
        assert!(h.norm().unwrap() <= 1.0 + 1e-9);
        for _ in 0..5 {
            let xi = random_density(regs.proof_qubits(), 3, &mut rng);
            let p = accept_probability_exact(&v, &[true], &xi).unwrap();
            assert!((p - (1.0 - h.energy(&xi).unwrap())).abs() < 1e-9);
        }
    }
}

#[test]
fn path_operators_account_for_rejection() {
    let mut rng = SeedStream::new(8).rng();
    let v = random_adaptive(Registers { n: 1, p1: 3, k: 1, p2: 2 }, 1, &mut rng).unwrap();
    let xi = random_pure_state(2, &mut rng).to_density();
    let rho0 = zero_input_state(&v, &xi);
    let reject: f64 = (0..2).map(|i| rho0.expectation(&path_operator(&v, &[false], &[i]).unwrap()).unwrap()).sum();
    let accept = accept_probability_exact(&v, &[false], &xi).unwrap();
    assert!((accept - (1.0 - reject)).abs() < 1e-9);
}

#[test]
fn decomposition_reassembles_path_operator() {
    let mut rng = SeedStream::new(9).rng();
    let v = random_adaptive(Registers { n: 1, p1: 2, k: 1, p2: 2 }, 1, &mut rng).unwrap();
    let d = unitary_decomposition(&v, &[true], &[1]).unwrap();
    assert_eq!(d.gamma(), 8);
    assert_eq!(d.gamma_formula(), 8);
    let p = path_operator(&v, &[true], &[1]).unwrap();
    assert!(d.reassemble().unwrap().max_abs_diff(&p) < 1e-9);

    let na = random_nonadaptive(Registers { n: 0, p1: 5, k: 1, p2: 3 }, 2, &mut rng).unwrap();
    let d = unitary_decomposition(&na, &[], &[2, 0]).unwrap();
    let p = path_operator(&na, &[], &[2, 0]).unwrap();
    assert!(d.reassemble().unwrap().max_abs_diff(&p) < 1e-9);
}
