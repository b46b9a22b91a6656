use qpcp::fixtures::ghz_marginals;
use qpcp::linalg::random::random_density;
use qpcp::linalg::{partial_trace, pauli_matrix, trace_distance, trace_norm, ComplexMatrix, DensityMatrix, PauliWord};
use qpcp::rng::SeedStream;
use qpcp::tomography::{
    audit, build_covering_set, cldm_copy_count, cldm_decide, estimate_marginals, marginal_shots, pauli_expectation,
    project_to_covering, reconstruct, CoveringSet, MarginalSpec,
};
use qpcp::QpcpError;

fn word(s: &str) -> PauliWord {
    s.parse().unwrap()
}

#[test]
fn pauli_expectation_examples() {
    let mut rng = SeedStream::new(0).rng();
    assert_eq!(pauli_expectation(&DensityMatrix::basis(1, 0), &word("Z"), 100, &mut rng).unwrap(), 1.0);
    assert_eq!(pauli_expectation(&DensityMatrix::basis(1, 1), &word("Z"), 100, &mut rng).unwrap(), -1.0);
    let shots = 10_000;
    let mean = pauli_expectation(&DensityMatrix::maximally_mixed(1), &word("X"), shots, &mut rng).unwrap();
    assert!(mean.abs() <= 3.0 / (shots as f64).sqrt());
}

#[test]
fn pauli_expectation_meets_hoeffding() {
    let mut rng = SeedStream::new(1).rng();
    let shots = 400u64;
    // Two-sided Hoeffding radius at 95% confidence.
    let radius = (2.0 * (2.0f64 / 0.05).ln() / shots as f64).sqrt();
    let mut hits = 0;
    for i in 0..100 {
        let rho = random_density(2, 1 + i % 4, &mut rng);
        let w = PauliWord::from_index(1 + i % 15, 2);
        let exact = rho.expectation(&pauli_matrix(&w)).unwrap();
        let est = pauli_expectation(&rho, &w, shots, &mut rng).unwrap();
        hits += usize::from((est - exact).abs() <= radius);
    }
    assert!(hits >= 95, "{hits}");
}

#[test]
fn reconstruction_from_exact_coefficients() {
    let rho = random_density(2, 2, &mut SeedStream::new(2).rng());
    let coeffs: Vec<f64> =
        (0..16).map(|j| rho.expectation(&pauli_matrix(&PauliWord::from_index(j, 2))).unwrap()).collect();
    assert!((coeffs[0] - 1.0).abs() < 1e-14);
    assert!(reconstruct(&coeffs, 2).max_abs_diff(rho.matrix()) < 1e-14);
}

#[test]
fn marginal_shot_count() {
    // Hoeffding for accuracy eps/d² at confidence 1 − δ/(m d²): ⌈2 ln(2 m d²/δ) d⁴/ε²⌉.
    let (eps, delta, m, d) = (0.1, 0.1, 2usize, 2usize);
    let d2 = (d * d) as f64;
    let want = (2.0 * (2.0 * m as f64 * d2 / delta).ln() * d2 * d2 / (eps * eps)).ceil() as u64;
    assert_eq!(marginal_shots(eps, delta, m, d).unwrap(), want);
}

#[test]
fn product_state_marginals() {
    let rho = DensityMatrix::basis(3, 0b101);
    let subsets = vec![vec![0, 1], vec![2]];
    let est = estimate_marginals(&rho, &subsets, 0.1, 0.1, &SeedStream::new(3)).unwrap();
    for (e, c) in est.iter().zip(&subsets) {
        let want = partial_trace(&rho, c).unwrap();
        // Basis states give deterministic Z outcomes; X and Y words stay noisy.
        assert!(trace_norm(&(e - want.matrix())).unwrap() <= 0.1);
    }
}

#[test]
fn ghz_marginal_is_recovered() {
    let (ghz, spec) = ghz_marginals(3).unwrap();
    let half = ComplexMatrix::from_real_diag(&[0.5, 0.0, 0.0, 0.5]);
    assert!(partial_trace(&ghz, &[0, 1]).unwrap().matrix().max_abs_diff(&half) < 1e-14);
    assert_eq!(spec.subsets.len(), 3);
    assert_eq!(spec, MarginalSpec::of_state(&ghz, spec.subsets.clone()).unwrap());

    let est = estimate_marginals(&ghz, &[vec![0, 1]], 0.1, 0.1, &SeedStream::new(4)).unwrap();
    assert!(trace_norm(&(&est[0] - &half)).unwrap() <= 0.1);
}

#[test]
fn estimation_failure_rate_is_calibrated() {
    let (eps, delta) = (0.2, 0.2);
    let rho = random_density(2, 2, &mut SeedStream::new(5).rng());
    let target = partial_trace(&rho, &[1]).unwrap();
    let seed = SeedStream::new(6);
    let reps = 100;
    let failures = (0..reps)
        .filter(|r| {
            let est = estimate_marginals(&rho, &[vec![1]], eps, delta, &seed.child(format!("rep={r}"))).unwrap();
            trace_norm(&(&est[0] - target.matrix())).unwrap() > eps
        })
        .count();
    let sigma = (delta * (1.0 - delta) / reps as f64).sqrt();
    assert!(failures as f64 / reps as f64 <= delta + 3.0 * sigma);
}

#[test]
fn cldm_decision_examples() {
    let a = DensityMatrix::basis(1, 0);
    let b = DensityMatrix::basis(1, 1);
    assert!(cldm_decide(&[a.matrix().clone()], std::slice::from_ref(&a), 0.0, 0.0).unwrap().accept);

    // Trace distance ½ is trace norm 1.
    let mixed = DensityMatrix::maximally_mixed(1);
    let r = cldm_decide(&[mixed.matrix().clone()], std::slice::from_ref(&a), 0.25, 0.25).unwrap();
    assert!(!r.accept);
    assert!((r.max_distance - 1.0).abs() < 1e-15);

    let skew = ComplexMatrix::from_real_diag(&[0.75, 0.25]);
    let r = cldm_decide(&[skew], std::slice::from_ref(&a), 0.25, 0.25).unwrap();
    assert_eq!(r.max_distance, 0.5);
    assert!(r.accept);

    assert!(matches!(cldm_decide(&[a.matrix().clone()], &[], 0.1, 0.1), Err(QpcpError::DimensionMismatch(_))));
    assert!(cldm_decide(&[ComplexMatrix::identity(4)], &[b], 0.1, 0.1).is_err());
}

#[test]
fn cldm_decision_is_monotone_in_threshold() {
    let mut rng = SeedStream::new(7).rng();
    for _ in 0..20 {
        let est =
            vec![random_density(1, 2, &mut rng).matrix().clone(), random_density(2, 1, &mut rng).matrix().clone()];
        let targets = vec![random_density(1, 1, &mut rng), random_density(2, 3, &mut rng)];
        let mut seen_accept = false;
        for t in 0..=20 {
            let accept = cldm_decide(&est, &targets, 0.1 * t as f64, 0.0).unwrap().accept;
            assert!(accept || !seen_accept);
            seen_accept |= accept;
        }
        assert!(seen_accept);
    }
}

#[test]
fn copy_count_examples() {
    let c = cldm_copy_count(1, 1, 4, 0.1, 1.0 / 6.0).unwrap();
    // 16·16·ln 6 / 0.01
    assert_eq!(c.l, (25_600.0 * 1.791_759_469_228_055f64).ceil() as u64);
    let (l, n, d) = (c.l as f64, 4.0, 1.0 / 6.0);
    assert!((c.k - (l + l * l * n * std::f64::consts::LN_2 / (2.0 * d * d))).abs() <= 1e-9 * c.k);

    let twice = cldm_copy_count(2, 1, 4, 0.1, 1.0 / 6.0).unwrap();
    assert!(twice.l > c.l);
    assert!(twice.k > c.k);
    assert!(cldm_copy_count(0, 1, 4, 0.1, 0.5).is_err());
}

#[test]
fn large_eps_cover_is_a_single_state() {
    let cs = build_covering_set(1, 1.0, 200, &mut SeedStream::new(8).rng()).unwrap();
    assert_eq!(cs.members.len(), 1);
    let only = &cs.members[0];
    let rho = random_density(1, 2, &mut SeedStream::new(9).rng());
    assert_eq!(project_to_covering(&rho, &cs).unwrap().1, only);
}

#[test]
fn qubit_cover_passes_audit() {
    let mut rng = SeedStream::new(10).rng();
    let cs = build_covering_set(1, 0.3, 10_000, &mut rng).unwrap();
    let report = audit(&cs, 10_000, &mut rng).unwrap();
    assert_eq!(report.failures, 0, "{report:?}");
    for m in &cs.members {
        assert!(m.matrix().hermiticity_error() < 1e-12);
    }
}

#[test]
fn cover_grows_as_eps_shrinks() {
    let seed = SeedStream::new(11);
    let median = |eps: f64| {
        let mut sizes: Vec<usize> = (0..3)
            .map(|s| {
                build_covering_set(1, eps, 500, &mut seed.child_rng(format!("eps={eps}/s={s}"))).unwrap().members.len()
            })
            .collect();
        sizes.sort_unstable();
        sizes[1]
    };
    let (a, b, c) = (median(0.5), median(0.3), median(0.2));
    assert!(a < b && b < c, "{a} {b} {c}");
}

#[test]
fn projection_examples() {
    let mut rng = SeedStream::new(12).rng();
    let cs = build_covering_set(1, 0.4, 300, &mut rng).unwrap();
    let (i, m) = project_to_covering(&cs.members[1], &cs).unwrap();
    assert_eq!((i, m), (1, &cs.members[1]));

    for _ in 0..20 {
        let rho = random_density(1, 2, &mut rng);
        let dists: Vec<f64> = cs.members.iter().map(|m| trace_distance(&rho, m).unwrap()).collect();
        let best = dists.iter().copied().fold(f64::INFINITY, f64::min);
        let want = dists.iter().position(|&d| d == best).unwrap();
        assert_eq!(project_to_covering(&rho, &cs).unwrap().0, want);
    }

    let empty = CoveringSet { num_qubits: 1, epsilon: 0.1, members: vec![] };
    assert!(matches!(project_to_covering(&cs.members[0], &empty), Err(QpcpError::EmptyCoveringSet)));
    assert!(project_to_covering(&DensityMatrix::basis(2, 0), &cs).is_err());
}
