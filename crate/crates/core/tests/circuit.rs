use proptest::prelude::*;
use qpcp::circuit::{circuit_adjoint, circuit_matrix, prepare_real_amplitudes, GateSpec, NamedGate};
use qpcp::linalg::random::random_unitary;
use qpcp::linalg::{embed_operator, kron, ComplexMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ALL: [NamedGate; 8] = [
    NamedGate::H,
    NamedGate::X,
    NamedGate::Y,
    NamedGate::Z,
    NamedGate::S,
    NamedGate::T,
    NamedGate::CNOT,
    NamedGate::CZ,
];

fn projector(bit: usize) -> ComplexMatrix {
    ComplexMatrix::from_real_diag(if bit == 0 { &[1.0, 0.0] } else { &[0.0, 1.0] })
}

#[test]
fn named_gates_are_unitary_with_matching_arity() {
    for g in ALL {
        let m = g.matrix();
        assert_eq!(m.rows(), 1 << g.arity());
        assert!(m.is_unitary(1e-12), "{g:?}");
    }
    let s = NamedGate::S.matrix();
    let t = NamedGate::T.matrix();
    assert!((&t * &t).max_abs_diff(&s) < 1e-15);
    assert!((&s * &s).max_abs_diff(&NamedGate::Z.matrix()) < 1e-15);
}

#[test]
fn circuit_matrix_follows_qubit_order() {
    // Qubit 0 is the most significant bit: CNOT(0 -> 1) maps |10⟩ to |11⟩.
    let m = circuit_matrix(&[GateSpec::named(NamedGate::CNOT, vec![0, 1])], 2);
    assert_eq!(m.get(3, 2), C64::new(1.0, 0.0));
    let flipped = circuit_matrix(&[GateSpec::named(NamedGate::CNOT, vec![1, 0])], 2);
    assert_eq!(flipped.get(3, 1), C64::new(1.0, 0.0));
    let hx = circuit_matrix(&[GateSpec::named(NamedGate::H, vec![0]), GateSpec::x(1)], 2);
    assert!(hx.max_abs_diff(&kron(&NamedGate::H.matrix(), &NamedGate::X.matrix())) < 1e-15);
}

#[test]
fn adjoint_inverts_every_gate_kind() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let u = random_unitary(4, &mut rng);
    let circuit = vec![
        GateSpec::named(NamedGate::T, vec![2]),
        GateSpec::named(NamedGate::S, vec![0]),
        GateSpec::unitary(u, vec![2, 0]),
        GateSpec::multiplexed(vec![1], vec![(1, random_unitary(2, &mut rng))], vec![0]),
        GateSpec::named(NamedGate::CNOT, vec![0, 1]),
    ];
    let full = [circuit.clone(), circuit_adjoint(&circuit)].concat();
    assert!(circuit_matrix(&full, 3).max_abs_diff(&ComplexMatrix::identity(8)) < 1e-12);
}

#[test]
fn multiplexed_equals_sum_of_controlled_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (u0, u1) = (random_unitary(2, &mut rng), random_unitary(2, &mut rng));
    let g = GateSpec::multiplexed(vec![0], vec![(0, u0.clone()), (1, u1.clone())], vec![1]);
    let want = &kron(&projector(0), &u0) + &kron(&projector(1), &u1);
    assert!(circuit_matrix(&[g], 2).max_abs_diff(&want) < 1e-14);

    // A missing case acts as identity.
    let partial = GateSpec::multiplexed(vec![0], vec![(1, u1.clone())], vec![1]);
    let want = &kron(&projector(0), &ComplexMatrix::identity(2)) + &kron(&projector(1), &u1);
    assert!(circuit_matrix(&[partial], 2).max_abs_diff(&want) < 1e-14);
}

#[test]
fn controlled_named_gate_matches_cnot() {
    let g = GateSpec::x(1).controlled(0, true);
    let cnot = circuit_matrix(&[GateSpec::named(NamedGate::CNOT, vec![0, 1])], 2);
    assert!(circuit_matrix(&[g], 2).max_abs_diff(&cnot) < 1e-15);
    let anti = GateSpec::z(1).controlled(0, false);
    let want = ComplexMatrix::from_real_diag(&[1.0, -1.0, 1.0, 1.0]);
    assert!(circuit_matrix(&[anti], 2).max_abs_diff(&want) < 1e-15);
}

#[test]
fn validation_rejects_bad_gates() {
    assert!(GateSpec::named(NamedGate::CNOT, vec![0, 0]).validate().is_err());
    assert!(GateSpec::named(NamedGate::CNOT, vec![0]).validate().is_err());
    assert!(GateSpec::unitary(ComplexMatrix::from_real_diag(&[1.0, 0.5]), vec![0]).validate().is_err());
    assert!(GateSpec::multiplexed(vec![0], vec![(2, NamedGate::X.matrix())], vec![1]).validate().is_err());
    assert!(GateSpec::multiplexed(vec![1], vec![(1, NamedGate::X.matrix())], vec![1]).validate().is_err());
    assert!(GateSpec::named(NamedGate::H, vec![3]).validate().is_ok());
}

#[test]
fn gate_json_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let gates = vec![
        GateSpec::named(NamedGate::CZ, vec![1, 2]),
        GateSpec::unitary(random_unitary(2, &mut rng), vec![0]),
        GateSpec::multiplexed(vec![2, 0], vec![(3, random_unitary(2, &mut rng))], vec![1]),
    ];
    let text = serde_json::to_string(&gates).unwrap();
    let back: Vec<GateSpec> = serde_json::from_str(&text).unwrap();
    assert_eq!(back, gates);
    assert!(serde_json::from_str::<GateSpec>(r#"{"targets":[0]}"#).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn prepared_amplitudes_match_target(seed in any::<u64>(), w in 1usize..4, zeros in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a: Vec<f64> = (0..1 << w).map(|_| rng.random::<f64>()).collect();
        for _ in 0..zeros {
            let i = rng.random_range(0..a.len());
            a[i] = 0.0;
        }
        let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-6);
        a.iter_mut().for_each(|v| *v /= norm);

        // Prepare on the lower qubits of a wider register; the spectator stays |0⟩.
        let qubits: Vec<usize> = (1..=w).collect();
        let mut amps = vec![C64::new(0.0, 0.0); 1 << (w + 1)];
        amps[0] = C64::new(1.0, 0.0);
        qpcp::circuit::apply_circuit(&prepare_real_amplitudes(&a, &qubits), &mut amps, w + 1);
        for (i, want) in a.iter().enumerate() {
            prop_assert!((amps[i] - C64::new(*want, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn single_qubit_gate_matches_embedding(seed in any::<u64>(), target in 0usize..3) {
        let u = random_unitary(2, &mut ChaCha8Rng::seed_from_u64(seed));
        let got = circuit_matrix(&[GateSpec::unitary(u.clone(), vec![target])], 3);
        prop_assert!(got.max_abs_diff(&embed_operator(&u, &[target], 3).unwrap()) < 1e-13);
    }
}
