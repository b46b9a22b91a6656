use proptest::prelude::*;
use qpcp::circuit::GateSpec;
use qpcp::fixtures::{accept_always, copy_verifier, random_adaptive};
use qpcp::linalg::random::{random_hermitian, random_pure_state, random_unitary};
use qpcp::linalg::{pauli_matrix, ComplexMatrix, StateVector, C64};
use qpcp::reduction::{
    contract_fixed_state, gamma_prime, hadamard_probabilities, hadamard_shots, hadamard_test, learn_hamiltonian,
    learn_hamiltonian_rounded, projector_decomposition, protocol_eta, quantize, unitary_decomposition,
    LocalHamiltonian, Term,
};
use qpcp::rng::SeedStream;
use qpcp::verifier::Registers;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn reassemble_projector(bits: &str) -> ComplexMatrix {
    let bits: Vec<bool> = bits.chars().map(|c| c == '1').collect();
    let dim = 1usize << bits.len();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for (sign, word) in projector_decomposition(&bits) {
        out = &out + &pauli_matrix(&word).scale_real(sign / dim as f64);
    }
    out
}

fn state_of(gates: &[GateSpec], n: usize) -> StateVector {
    let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
    amps[0] = C64::new(1.0, 0.0);
    qpcp::circuit::apply_circuit(gates, &mut amps, n);
    StateVector::new(amps).unwrap()
}

#[test]
fn projector_decomposition_examples() {
    assert_eq!(reassemble_projector("0"), ComplexMatrix::from_real_diag(&[1.0, 0.0]));
    assert_eq!(reassemble_projector("1"), ComplexMatrix::from_real_diag(&[0.0, 1.0]));
    assert_eq!(reassemble_projector("10"), ComplexMatrix::from_real_diag(&[0.0, 0.0, 1.0, 0.0]));
    assert_eq!(projector_decomposition(&[true, false, true]).len(), 8);
}

#[test]
fn hadamard_shot_count() {
    // ⌈2 ln(4/δ) / ε²⌉
    assert_eq!(hadamard_shots(0.1, 0.1).unwrap(), 738);
    assert_eq!(hadamard_shots(0.5, 0.5).unwrap(), 17);
    assert!(hadamard_shots(0.0, 0.1).is_err());
    assert!(hadamard_shots(0.1, 1.0).is_err());
}

#[test]
fn hadamard_probabilities_match_inner_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let w = vec![GateSpec::unitary(random_unitary(4, &mut rng), vec![0, 1])];
        let u_psi = vec![GateSpec::unitary(random_unitary(4, &mut rng), vec![1, 0])];
        let u_phi = vec![GateSpec::unitary(random_unitary(2, &mut rng), vec![1])];
        let psi = state_of(&u_psi, 2);
        let w_phi = state_of(&[u_phi.clone(), w.clone()].concat(), 2);
        let z = psi.inner(&w_phi);
        let (p_re, p_im) = hadamard_probabilities(&w, &u_psi, &u_phi, 2).unwrap();
        assert!((2.0 * p_re - 1.0 - z.re).abs() < 1e-12);
        assert!((2.0 * p_im - 1.0 - z.im).abs() < 1e-12);
    }
}

#[test]
fn hadamard_test_meets_its_error_bound() {
    let (eps, delta) = (0.1, 0.1);
    let mut rng = SeedStream::new(2).rng();
    let mut misses = 0;
    for _ in 0..200 {
        let w = vec![GateSpec::unitary(random_unitary(4, &mut rng), vec![0, 1])];
        let u_psi = vec![GateSpec::unitary(random_unitary(4, &mut rng), vec![0, 1])];
        let (p_re, p_im) = hadamard_probabilities(&w, &u_psi, &[], 2).unwrap();
        let est = hadamard_test(&w, &u_psi, &[], 2, eps, delta, &mut rng).unwrap();
        if (est.re - (2.0 * p_re - 1.0)).abs() > eps || (est.im - (2.0 * p_im - 1.0)).abs() > eps {
            misses += 1;
        }
    }
    // Expected misses are at most 200·δ = 20.
    assert!(misses <= 20, "{misses} misses");
}

#[test]
fn decomposition_sizes() {
    let copy = copy_verifier(1, 2, 0).unwrap();
    let d = unitary_decomposition(&copy, &[], &[1]).unwrap();
    assert_eq!(d.gamma_formula(), 8);
    assert_eq!(d.gamma(), 8);
    assert!(d.terms().all(|t| t.sign.abs() == 1.0));

    let regs = Registers { n: 0, p1: 3, k: 1, p2: 3 };
    let v = random_adaptive(regs, 2, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    let d = unitary_decomposition(&v, &[], &[2, 0]).unwrap();
    assert_eq!(d.gamma_formula(), 72);
    // Unpadded count: output projector (2) times each 2-qubit index projector twice (4⁴).
    assert_eq!(d.gamma(), 2 * 4usize.pow(4));
}

#[test]
fn eta_and_gamma_prime() {
    assert_eq!(gamma_prime(1, 1, 2), 8);
    assert_eq!(protocol_eta(1, 8, 1.0 / 12.0), 12);
    assert_eq!(protocol_eta(1, 8, 1.0), 9);
    assert_eq!(protocol_eta(2, 8, 1.0), 17);
}

#[test]
fn learning_accept_always_gives_small_hamiltonian() {
    let v = accept_always(1, 2, 1).unwrap();
    let learned = learn_hamiltonian(&v, &[], 0.1, 0.1, &SeedStream::new(4)).unwrap();
    assert!(learned.hamiltonian.norm().unwrap() <= 0.1);
    assert!(learned.hamiltonian.is_psd(1e-9).unwrap());

    let rounded = learn_hamiltonian_rounded(&v, &[], 8, 0.1, &SeedStream::new(5)).unwrap();
    assert!(rounded.hamiltonian.terms.iter().all(|t| t.matrix.max_abs_diff(&ComplexMatrix::zeros(2, 2)) == 0.0));
    assert_eq!(rounded.params.eta, Some(8));
}

#[test]
fn learning_rejects_bad_parameters() {
    let v = accept_always(1, 2, 1).unwrap();
    assert!(learn_hamiltonian(&v, &[], 0.0, 0.1, &SeedStream::new(0)).is_err());
    assert!(learn_hamiltonian(&v, &[], 0.1, 1.5, &SeedStream::new(0)).is_err());
    assert!(learn_hamiltonian_rounded(&v, &[], 0, 0.1, &SeedStream::new(0)).is_err());
}

#[test]
fn local_hamiltonian_json_and_validation() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let raw = random_hermitian(4, &mut rng);
    let h = LocalHamiltonian::new(
        3,
        2,
        vec![
            Term { support: vec![0, 2], matrix: &raw + &ComplexMatrix::identity(4).scale_real(5.0) },
            Term { support: vec![1], matrix: ComplexMatrix::from_real_diag(&[0.0, 1.0]) },
        ],
        Some(vec![0.25, 0.75]),
    )
    .unwrap();
    assert_eq!(LocalHamiltonian::from_json(&h.to_json()).unwrap(), h);

    let unsorted = Term { support: vec![2, 0], matrix: ComplexMatrix::identity(4) };
    assert!(LocalHamiltonian::new(3, 2, vec![unsorted], None).is_err());
    let wide = Term { support: vec![0, 1, 2], matrix: ComplexMatrix::identity(8) };
    assert!(LocalHamiltonian::new(3, 2, vec![wide], None).is_err());
    let skew = Term {
        support: vec![0],
        matrix: ComplexMatrix::from_rows(&[
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
        ]),
    };
    assert!(LocalHamiltonian::new(1, 1, vec![skew], None).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantize_lands_on_nearest_grid_point(value in -1.0f64..=1.0, eta in 1usize..12) {
        let step = 4.0 / 2f64.powi(eta as i32);
        let got = quantize(value, eta);
        let k = (got + 1.0) / step;
        prop_assert!((k - k.round()).abs() < 1e-9);
        prop_assert!((-1.0..=1.0).contains(&got));
        prop_assert!((got - value).abs() <= step / 2.0 + 1e-12);
        prop_assert_eq!(quantize(got, eta), got);
    }

    #[test]
    fn quantize_is_monotone(a in -1.5f64..1.5, b in -1.5f64..1.5, eta in 1usize..10) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(quantize(lo, eta) <= quantize(hi, eta));
    }

    #[test]
    fn contraction_with_fixed_state(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_hermitian(8, &mut rng);
        let psi = random_pure_state(1, &mut rng);
        let phi = random_pure_state(2, &mut rng);
        let b = contract_fixed_state(&a, &psi).unwrap();
        let joint = phi.tensor(&psi);
        let lhs = phi.to_density().expectation(&b).unwrap();
        let rhs = joint.to_density().expectation(&a).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }
}
