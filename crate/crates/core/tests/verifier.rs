use proptest::prelude::*;
use qpcp::circuit::GateSpec;
use qpcp::fixtures::{accept_always, copy_verifier, random_adaptive, random_nonadaptive, reject_always};
use qpcp::linalg::random::random_density;
use qpcp::linalg::{ComplexMatrix, DensityMatrix, StateVector, C64};
use qpcp::rng::SeedStream;
use qpcp::verifier::{
    accept_probability_exact, parallel_repeat, path_distribution, path_operator, repetition_count, sample_run,
    AdaptiveVerifier, AnyVerifier, QueryVerifier, Registers, Sampler, VerifierSpec,
};
use qpcp::QpcpError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// cos θ|0⟩ + sin θ|1⟩ on one qubit with ⟨1|·|1⟩ = p.
fn biased(p: f64) -> DensityMatrix {
    StateVector::new(vec![C64::new((1.0 - p).sqrt(), 0.0), C64::new(p.sqrt(), 0.0)]).unwrap().to_density()
}

fn binomial_tail(p: f64, l: usize, k: usize) -> f64 {
    (k..=l)
        .map(|j| {
            let c = (0..j).fold(1.0, |acc, i| acc * (l - i) as f64 / (i + 1) as f64);
            c * p.powi(j as i32) * (1.0 - p).powi((l - j) as i32)
        })
        .sum()
}

/// Σ over every ordered path of tr[P ρ⁰], with ρ⁰ = |0⟩⟨0| ⊗ ξ.
fn rejection_mass<V: QueryVerifier>(v: &V, x: &[bool], xi: &DensityMatrix) -> f64 {
    let rho0 = DensityMatrix::basis(v.registers().work_qubits(), 0).tensor(xi);
    let n = v.registers().proof_qubits();
    let mut paths: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..v.q() {
        paths = paths
            .into_iter()
            .flat_map(|p| (0..n).filter(|i| !p.contains(i)).map(|i| [p.clone(), vec![i]].concat()).collect::<Vec<_>>())
            .collect();
    }
    paths.iter().map(|p| rho0.expectation(&path_operator(v, x, p).unwrap()).unwrap()).sum()
}

#[test]
fn reject_and_accept_always_path_operators() {
    let xi = random_density(2, 2, &mut SeedStream::new(0).rng());
    assert!((rejection_mass(&reject_always(1, 2, 1).unwrap(), &[], &xi) - 1.0).abs() < 1e-12);
    assert!(rejection_mass(&accept_always(1, 2, 1).unwrap(), &[], &xi).abs() < 1e-12);
}

#[test]
fn path_operators_are_psd_contractions() {
    let v = random_adaptive(Registers { n: 1, p1: 3, k: 1, p2: 3 }, 2, &mut SeedStream::new(1).rng()).unwrap();
    let p = path_operator(&v, &[true], &[2, 0]).unwrap();
    let eig = qpcp::linalg::hermitian_eigenvalues(&p).unwrap();
    assert!(eig[0] >= -1e-12 && *eig.last().unwrap() <= 1.0 + 1e-12);
    assert!(matches!(path_operator(&v, &[true], &[1, 1]), Err(QpcpError::MalformedPath(_))));
    assert!(matches!(path_operator(&v, &[true], &[5, 1]), Err(QpcpError::MalformedPath(_))));
    assert!(matches!(path_operator(&v, &[true], &[1]), Err(QpcpError::MalformedPath(_))));
}

#[test]
fn accept_probability_examples() {
    let xi = DensityMatrix::maximally_mixed(2);
    assert_eq!(accept_probability_exact(&reject_always(1, 2, 1).unwrap(), &[], &xi).unwrap(), 0.0);
    let copy = copy_verifier(1, 2, 0).unwrap();
    let proof = DensityMatrix::basis(1, 1).tensor(&DensityMatrix::basis(1, 0));
    assert!((accept_probability_exact(&copy, &[], &proof).unwrap() - 1.0).abs() < 1e-12);
    assert!(accept_probability_exact(&copy, &[true], &proof).is_err());
}

#[test]
fn sampling_examples() {
    let mut rng = SeedStream::new(2).rng();
    let never = reject_always(1, 2, 1).unwrap();
    let xi = DensityMatrix::maximally_mixed(2);
    assert!((0..200).all(|_| !sample_run(&never, &[], &xi, &mut rng).unwrap().1));

    let copy = copy_verifier(1, 2, 0).unwrap();
    let half = biased(0.5).tensor(&DensityMatrix::basis(1, 0));
    let hits = Sampler::new(&copy, &[], &half).unwrap().count_accepts(10_000, &mut rng).unwrap();
    let mean = hits as f64 / 1e4;
    assert!((0.48..=0.52).contains(&mean), "{mean}");
}

#[test]
fn repetition_count_examples() {
    assert_eq!(repetition_count(2.0 / 3.0, 1.0 / 3.0, 1.0).unwrap(), 13);
    assert_eq!(repetition_count(1.0, 0.0, 1.0).unwrap(), 2);
    assert_eq!(repetition_count(0.6, 0.5, 3.0).unwrap(), 416);
    assert!(repetition_count(0.3, 0.5, 1.0).is_err());
}

#[test]
fn parallel_repeat_examples() {
    let copy = copy_verifier(1, 2, 0).unwrap();
    let xi = biased(0.9).tensor(&DensityMatrix::basis(1, 0));
    let single = accept_probability_exact(&copy, &[], &xi).unwrap();
    let once = parallel_repeat(copy.clone(), 1, 0.5).unwrap();
    assert!((once.accept_probability_exact(&[], std::slice::from_ref(&xi)).unwrap() - single).abs() < 1e-12);

    let r = repetition_count(2.0 / 3.0, 1.0 / 3.0, 1.0).unwrap();
    let rep = parallel_repeat(copy, r, 0.5).unwrap();
    let p = rep.accept_probability_exact(&[], std::slice::from_ref(&xi)).unwrap();
    assert!((p - binomial_tail(0.9, 13, 7)).abs() < 1e-12);
    assert!(p >= 0.99);
    assert_eq!(rep.query_count(), 13);
    assert!(parallel_repeat(rep.base.clone(), 0, 0.5).is_err());
}

#[test]
fn honest_repetition_meets_chernoff_completeness() {
    let (c, s) = (0.8, 0.4);
    let copy = copy_verifier(1, 2, 0).unwrap();
    let xi = biased(c).tensor(&DensityMatrix::basis(1, 0));
    for r in [5usize, 11, 21, 41] {
        let rep = parallel_repeat(copy.clone(), r, (c + s) / 2.0).unwrap();
        let p = rep.accept_probability_exact(&[], std::slice::from_ref(&xi)).unwrap();
        let bound = 1.0 - (-2.0 * r as f64 * ((c - s) / 2.0).powi(2)).exp();
        assert!(p >= bound, "R = {r}: {p} < {bound}");
    }
}

#[test]
fn structural_checks() {
    let regs = Registers { n: 0, p1: 2, k: 1, p2: 2 };
    // First circuit touches a slot before any query.
    let early = AdaptiveVerifier::new(regs, 1, vec![vec![GateSpec::x(2)], vec![]], vec![0], 1);
    assert!(matches!(early, Err(QpcpError::Structural(_))));
    let wrong_count = AdaptiveVerifier::new(regs, 1, vec![vec![]], vec![0], 1);
    assert!(matches!(wrong_count, Err(QpcpError::Structural(_))));
    let out_of_b = AdaptiveVerifier::new(regs, 1, vec![vec![], vec![]], vec![0], 2);
    assert!(matches!(out_of_b, Err(QpcpError::Structural(_))));
    let bad_gate = GateSpec::unitary(ComplexMatrix::from_real_diag(&[1.0, 2.0]), vec![1]);
    assert!(AdaptiveVerifier::new(regs, 1, vec![vec![bad_gate], vec![]], vec![0], 1).is_err());
}

#[test]
fn duplicate_index_outcomes_are_rejected() {
    // Second index register value equals the first query: X on the index qubit is undone.
    let regs = Registers { n: 0, p1: 2, k: 1, p2: 2 };
    let v = AdaptiveVerifier::new(regs, 2, vec![vec![], vec![], vec![]], vec![0], 1).unwrap();
    let err = accept_probability_exact(&v, &[], &DensityMatrix::maximally_mixed(2)).unwrap_err();
    assert!(matches!(err, QpcpError::Structural(_)));
}

#[test]
fn spec_json_round_trip() {
    let mut rng = SeedStream::new(3).rng();
    let a: AnyVerifier = random_adaptive(Registers { n: 1, p1: 3, k: 2, p2: 2 }, 2, &mut rng).unwrap().into();
    let na: AnyVerifier = random_nonadaptive(Registers { n: 0, p1: 5, k: 1, p2: 3 }, 2, &mut rng).unwrap().into();
    for v in [a, na] {
        let text = serde_json::to_string(&VerifierSpec::from(&v)).unwrap();
        assert_eq!(VerifierSpec::from_json(&text).unwrap(), v);
    }
    let named = r#"{"n":0,"p1":2,"k":1,"p2":2,"q":1,"index_register":[0],"output_qubit":1,
        "circuits":[[{"gate":"H","targets":[0]}],[{"gate":"CNOT","targets":[2,1]}]]}"#;
    let v = VerifierSpec::from_json(named).unwrap();
    let p = accept_probability_exact(&v, &[], &DensityMatrix::basis(2, 0b11)).unwrap();
    assert!((p - 1.0).abs() < 1e-12);
}

#[test]
fn nonadaptive_paths_ignore_the_proof() {
    let mut rng = SeedStream::new(4).rng();
    let v = random_nonadaptive(Registers { n: 1, p1: 5, k: 1, p2: 3 }, 2, &mut rng).unwrap();
    let reference = path_distribution(&v, &[true], &DensityMatrix::basis(3, 0)).unwrap();
    for _ in 0..10 {
        let xi = random_density(3, 3, &mut rng);
        let paths = path_distribution(&v, &[true], &xi).unwrap();
        assert_eq!(paths.len(), reference.len());
        for (a, b) in paths.iter().zip(&reference) {
            assert_eq!(a.indices, b.indices);
            assert!((a.probability - b.probability).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn branch_mass_and_rejection_identity(seed in any::<u64>(), q in 1usize..3, p2 in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random_adaptive(Registers { n: 1, p1: 3, k: 1, p2 }, q, &mut rng).unwrap();
        let xi = random_density(p2, 2, &mut rng);
        let run = qpcp::verifier::exact_run(&v, &[false], &xi).unwrap();
        prop_assert!((run.total_probability() - 1.0).abs() < 1e-9);
        prop_assert!((run.accept - (1.0 - rejection_mass(&v, &[false], &xi))).abs() < 1e-9);
    }

    #[test]
    fn acceptance_is_affine_in_the_proof(seed in any::<u64>(), lambda in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random_adaptive(Registers { n: 0, p1: 3, k: 2, p2: 2 }, 2, &mut rng).unwrap();
        let (a, b) = (random_density(4, 1, &mut rng), random_density(4, 2, &mut rng));
        let mix = a.mix(&b, lambda).unwrap();
        let pa = accept_probability_exact(&v, &[], &a).unwrap();
        let pb = accept_probability_exact(&v, &[], &b).unwrap();
        let pm = accept_probability_exact(&v, &[], &mix).unwrap();
        prop_assert!((pm - (lambda * pa + (1.0 - lambda) * pb)).abs() < 1e-9);
    }
}
