use qpcp::fixtures::{
    accept_always, copy_verifier, gentle_verifier, product_separable, random_adaptive, reject_always,
};
use qpcp::hamiltonian::ground_energy;
use qpcp::linalg::random::random_density;
use qpcp::linalg::{ComplexMatrix, DensityMatrix, StateVector, C64};
use qpcp::protocols::{
    and_of_verifiers, exact_oracle, k_separable_check, nonadaptive_simulation, qcma_pipeline, qma_for_qpcp,
    strong_error_reduction, AndPart, SeparableWitness, DEFAULT_REPETITION_CAP,
};
use qpcp::reduction::{exact_hamiltonian, LocalHamiltonian, Term};
use qpcp::rng::SeedStream;
use qpcp::verifier::{path_distribution, Registers};
use qpcp::QpcpError;

fn binomial_tail(p: f64, l: usize, k: usize) -> f64 {
    // Independent closed form: Σ_{j≥k} C(l, j) p^j (1−p)^{l−j}.
    (k..=l)
        .map(|j| {
            let c = (0..j).fold(1.0, |acc, i| acc * (l - i) as f64 / (i + 1) as f64);
            c * p.powi(j as i32) * (1.0 - p).powi((l - j) as i32)
        })
        .sum()
}

#[test]
fn strong_reduction_matches_binomial_on_basis_proofs() {
    let yes = gentle_verifier(1.0 - 1e-4, 0.0).unwrap();
    let no = gentle_verifier(0.5, 0.5).unwrap();
    let seed = SeedStream::new(3);
    let (c, s) = (1.0 - 1e-4, 0.5);
    let r = strong_error_reduction(&yes, &[], &DensityMatrix::basis(1, 0), 5, c, s, &seed).unwrap();
    assert_eq!(r.required_accepts, 4);
    assert!((r.accept_probability - binomial_tail(c, 5, 4)).abs() < 1e-12);
    assert!(r.accept_probability >= 0.99);
    assert!(r.disturbance < 1e-9);
    for xi in [DensityMatrix::basis(1, 0), DensityMatrix::basis(1, 1), DensityMatrix::maximally_mixed(1)] {
        let r = strong_error_reduction(&no, &[], &xi, 5, c, s, &seed).unwrap();
        assert!((r.accept_probability - 6.0 / 32.0).abs() < 1e-12);
        assert!((r.majority_accept_probability - 0.5).abs() < 1e-12);
    }
}

#[test]
fn strong_reduction_distribution_sums_to_one() {
    let v = gentle_verifier(0.9, 0.2).unwrap();
    let plus = StateVector::normalized(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).unwrap().to_density();
    let r = strong_error_reduction(&v, &[], &plus, 4, 0.9, 0.2, &SeedStream::new(0)).unwrap();
    assert!((r.count_distribution.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    // Diagonal effects: the count law is a mixture of two binomials.
    let mix = 0.5 * binomial_tail(0.9, 4, 3) + 0.5 * binomial_tail(0.2, 4, 3);
    assert!((r.accept_probability - mix).abs() < 1e-10);
}

#[test]
fn simulation_separates_fixtures() {
    let seed = SeedStream::new(11);
    let (c, s) = (1.0, 2.0 / 3.0);
    let no = reject_always(1, 2, 1).unwrap();
    let sim = nonadaptive_simulation(&no, &[], c, s, DEFAULT_REPETITION_CAP, &seed).unwrap();
    assert_eq!(sim.params.eta, 12);
    assert_eq!(sim.params.repetitions_executed, 64);
    let xi = DensityMatrix::maximally_mixed(2);
    let p_no = sim.accept_probability(&xi).unwrap();
    let oracle = binomial_tail(15.0 / 16.0, 64, sim.params.required_accepts);
    assert!((p_no - oracle).abs() < 1e-9, "{p_no} vs {oracle}");
    assert!(p_no <= 1.0 / 3.0);

    let yes = accept_always(1, 2, 1).unwrap();
    let sim = nonadaptive_simulation(&yes, &[], c, s, DEFAULT_REPETITION_CAP, &seed).unwrap();
    assert!(sim.accept_probability(&xi).unwrap() >= 2.0 / 3.0);
}

#[test]
fn qcma_pipeline_decides_fixtures() {
    let seed = SeedStream::new(5);
    let (r, _) = qcma_pipeline(&accept_always(1, 2, 1).unwrap(), &[], 1.0, 2.0 / 3.0, exact_oracle, &seed).unwrap();
    assert!(r.accept);
    let (r, _) = qcma_pipeline(&reject_always(1, 2, 1).unwrap(), &[], 1.0, 2.0 / 3.0, exact_oracle, &seed).unwrap();
    assert!(!r.accept);
    assert!((r.ground_energy - 1.0).abs() < 0.1);
}

#[test]
fn and_rejects_overlapping_registers() {
    let v = copy_verifier(1, 2, 0).unwrap();
    let part =
        |register: Vec<usize>| AndPart { verifier: &v, input: vec![], register, proof: DensityMatrix::basis(2, 0) };
    let err = and_of_verifiers(&[part(vec![0, 1]), part(vec![1, 2])], &SeedStream::new(0)).unwrap_err();
    assert!(matches!(err, QpcpError::RegisterOverlap(1)));
}

#[test]
fn and_multiplies_acceptance() {
    let v = copy_verifier(1, 2, 0).unwrap();
    let plus = StateVector::normalized(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).unwrap().to_density();
    let parts = [
        AndPart { verifier: &v, input: vec![], register: vec![0, 1], proof: DensityMatrix::basis(2, 0b10) },
        AndPart { verifier: &v, input: vec![], register: vec![2, 3], proof: plus.tensor(&plus) },
    ];
    let r = and_of_verifiers(&parts, &SeedStream::new(0)).unwrap();
    assert!((r.accept_probabilities[0] - 1.0).abs() < 1e-12);
    assert!((r.accept_probability - 0.5).abs() < 1e-12);
}

#[test]
fn separable_check_accepts_honest_product_witness() {
    let (h, w) = product_separable().unwrap();
    let r = k_separable_check(&h, 0.1, 0.6, 2, &w, &SeedStream::new(9)).unwrap();
    assert!(r.witness_valid);
    assert!(r.energy.abs() < 1e-12);
    assert!(r.accept, "{r:?}");
    assert!((r.delta - 1.0 / 6.0).abs() < 1e-15);
}

#[test]
fn separable_check_rejects_inconsistent_quantum_proof() {
    let (h, mut w) = product_separable().unwrap();
    w.quantum = DensityMatrix::basis(2, 0b11);
    let r = k_separable_check(&h, 0.1, 0.6, 2, &w, &SeedStream::new(9)).unwrap();
    assert!(r.energy_ok);
    assert!(!r.accept);
}

#[test]
fn separable_check_flags_invalid_witness() {
    let (h, mut w) = product_separable().unwrap();
    w.classical[0][0] = w.classical[0][0].scale_real(2.0);
    let r = k_separable_check(&h, 0.1, 0.6, 2, &w, &SeedStream::new(9)).unwrap();
    assert!(!r.witness_valid && !r.accept);
    assert!(k_separable_check(&h, 0.1, 0.6, 3, &w, &SeedStream::new(9)).is_err());
}

#[test]
fn strong_reduction_leaves_the_proof_alone_when_always_accepting() {
    let v = gentle_verifier(1.0, 1.0).unwrap();
    let plus = StateVector::normalized(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).unwrap().to_density();
    for xi in [plus, random_density(1, 2, &mut SeedStream::new(1).rng())] {
        let r = strong_error_reduction(&v, &[], &xi, 7, 1.0, 0.5, &SeedStream::new(2)).unwrap();
        assert!((r.accept_probability - 1.0).abs() < 1e-12);
        assert!(r.disturbance < 1e-9);
        assert!(r.accept);
    }
}

#[test]
fn simulation_parameters_and_query_distribution() {
    let v = copy_verifier(1, 2, 0).unwrap();
    let sim = nonadaptive_simulation(&v, &[], 1.0, 2.0 / 3.0, 4, &SeedStream::new(3)).unwrap();
    assert_eq!(sim.params.repetitions_full, 18_432);
    assert_eq!(sim.params.queries_full, 18_432 * sim.params.kitaev_locality as u64);
    assert_eq!(sim.params.repetitions_executed, 4);

    let base = &sim.composite.base;
    let reference = path_distribution(base, &[], &DensityMatrix::basis(2, 0)).unwrap();
    let mut rng = SeedStream::new(4).rng();
    for _ in 0..5 {
        let paths = path_distribution(base, &[], &random_density(2, 3, &mut rng)).unwrap();
        assert_eq!(paths.len(), reference.len());
        for (a, b) in paths.iter().zip(&reference) {
            assert_eq!(a.indices, b.indices);
            assert!((a.probability - b.probability).abs() < 1e-9);
        }
    }
}

#[test]
fn qcma_pipeline_decides_random_promise_instances() {
    let seed = SeedStream::new(6);
    let regs = Registers { n: 1, p1: 3, k: 1, p2: 2 };
    let gap = 0.3;
    let mut correct = 0;
    for i in 0..20 {
        let v = random_adaptive(regs, 1, &mut seed.child_rng(format!("verifier={i}"))).unwrap();
        let x = [i % 2 == 1];
        // Best acceptance over all proofs, from the exact Hamiltonian.
        let best = 1.0 - ground_energy(&exact_hamiltonian(&v, &x).unwrap()).unwrap();
        let (c, s, yes) = if best >= 0.5 { (best, best - gap, true) } else { (best + gap, best, false) };
        let (r, _) = qcma_pipeline(&v, &x, c, s, exact_oracle, &seed.child(format!("run={i}"))).unwrap();
        correct += usize::from(r.accept == yes);
    }
    assert!(correct >= 18, "{correct}/20");
}

#[test]
fn and_examples() {
    let yes = accept_always(1, 2, 1).unwrap();
    let no = reject_always(1, 2, 1).unwrap();
    let proof = DensityMatrix::maximally_mixed(2);
    let part = |v, register: Vec<usize>| AndPart { verifier: v, input: vec![], register, proof: proof.clone() };
    let all = [part(&yes, vec![0, 1]), part(&yes, vec![2, 3]), part(&yes, vec![4, 5])];
    let r = and_of_verifiers(&all, &SeedStream::new(7)).unwrap();
    assert_eq!(r.accept_probability, 1.0);
    assert!(r.accept);
    let one_bad = [part(&yes, vec![0, 1]), part(&no, vec![2, 3]), part(&yes, vec![4, 5])];
    let r = and_of_verifiers(&one_bad, &SeedStream::new(7)).unwrap();
    assert_eq!(r.accept_probability, 0.0);
    assert!(!r.accept);
}

#[test]
fn separable_parameters() {
    let one = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
    let terms = (0..5).map(|_| Term { support: vec![0], matrix: one.clone() }).collect();
    let h = LocalHamiltonian::new(1, 1, terms, Some(vec![0.2; 5])).unwrap();
    let ket0 = DensityMatrix::basis(1, 0);
    let w = SeparableWitness { classical: vec![vec![ket0.matrix().clone()]; 5], quantum: ket0 };
    let r = k_separable_check(&h, 0.1, 0.5, 1, &w, &SeedStream::new(8)).unwrap();
    assert!((r.beta - 0.04).abs() < 1e-15);
    assert!((r.alpha - 0.005).abs() < 1e-15);
    assert!((r.a_prime - 0.2).abs() < 1e-15 && (r.b_prime - 0.4).abs() < 1e-15);
    assert!((r.as_stated.delta - 1.0 / 3.0).abs() < 1e-15);
    assert!(r.accept);

    let mut bad = w.clone();
    bad.classical[2][0] = ComplexMatrix::from_real_diag(&[1.2, -0.2]);
    assert!(!k_separable_check(&h, 0.1, 0.5, 1, &bad, &SeedStream::new(8)).unwrap().witness_valid);
    let short = SeparableWitness { classical: w.classical[..4].to_vec(), ..w };
    assert!(matches!(
        k_separable_check(&h, 0.1, 0.5, 1, &short, &SeedStream::new(8)),
        Err(QpcpError::MalformedWitness(_))
    ));
}

fn all_zero_witness(v: &impl qpcp::verifier::QueryVerifier) -> SeparableWitness {
    let n = v.registers().proof_qubits();
    let ket0 = DensityMatrix::basis(1, 0).matrix().clone();
    SeparableWitness { classical: vec![vec![ket0]; n], quantum: DensityMatrix::basis(n, 0) }
}

#[test]
fn qma_protocol_examples() {
    let (c, s) = (1.0, 1.0 / 3.0);
    let yes = accept_always(1, 2, 1).unwrap();
    let r = qma_for_qpcp(&yes, &[], c, s, 1, &all_zero_witness(&yes), &SeedStream::new(9)).unwrap();
    assert!(r.separable.energy_ok && r.separable.accept, "{r:?}");

    let no = reject_always(1, 2, 1).unwrap();
    let r = qma_for_qpcp(&no, &[], c, s, 1, &all_zero_witness(&no), &SeedStream::new(9)).unwrap();
    assert!(!r.separable.energy_ok && !r.separable.accept);
}
