//! Seeded property experiments, one per acceptance criterion.
//!
//! Each experiment returns an [`Outcome`] whose `detail` depends only on the
//! seed; wall time is kept apart so reports can be compared byte for byte.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{QpcpError, Result};
use crate::fixtures::{
    accept_always, copy_verifier, gentle_verifier, ghz_marginals, plus_check, random_adaptive, random_hamiltonian,
    random_nonadaptive, reject_always, spiky_hamiltonian, uniform_reject,
};
use crate::hamiltonian::{kitaev_verifier, sample_count, sample_terms, smooth, weighted_error_check};
use crate::linalg::random::{random_density, random_pure_state};
use crate::linalg::{
    ceil_log2, hermitian_eigen, hermitian_eigenvalues, operator_norm, partial_trace, trace_norm, ComplexMatrix,
    DensityMatrix, StateVector, C64,
};
use crate::protocols::{nonadaptive_simulation, strong_error_reduction, DEFAULT_REPETITION_CAP};
use crate::reduction::{exact_hamiltonian, learn_hamiltonian, learn_hamiltonian_rounded, LocalHamiltonian, Term};
use crate::rng::SeedStream;
use crate::tomography::estimate_marginals;
use crate::verifier::{accept_probability_exact, path_distribution, AnyVerifier, QueryVerifier, Registers, Sampler};

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "energy identity"),
    (2, "reduction learning"),
    (3, "fixed rounding"),
    (4, "smoothing"),
    (5, "kitaev verifier"),
    (6, "term sampling"),
    (7, "marginal tomography"),
    (8, "weighted error bound"),
    (9, "strong error reduction"),
    (10, "non-adaptive simulation"),
];

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub criterion: u8,
    pub name: String,
    pub pass: bool,
    pub detail: Value,
    #[serde(skip)]
    pub elapsed_secs: f64,
    /// Wall-clock budget; checked by the acceptance suite, not part of `pass`.
    #[serde(skip)]
    pub time_limit_secs: Option<f64>,
}

impl Outcome {
    pub fn within_time(&self) -> bool {
        self.time_limit_secs.is_none_or(|t| self.elapsed_secs <= t)
    }
}

pub fn run(criterion: u8, seed: u64) -> Result<Outcome> {
    let name = CRITERIA
        .iter()
        .find(|(c, _)| *c == criterion)
        .map(|(_, n)| n.to_string())
        .ok_or_else(|| QpcpError::InvalidParameter(format!("no criterion {criterion}; expected 1..=10")))?;
    let stream = SeedStream::new(seed).child(format!("criterion={criterion}"));
    let start = Instant::now();
    let (pass, detail, limit) = match criterion {
        1 => energy_identity(&stream)?,
        2 => reduction_learning(&stream)?,
        3 => fixed_rounding(&stream)?,
        4 => smoothing(&stream)?,
        5 => kitaev(&stream)?,
        6 => term_sampling(&stream)?,
        7 => tomography(&stream)?,
        8 => weighted_error(&stream)?,
        9 => strong_reduction(&stream)?,
        _ => simulation(&stream)?,
    };
    Ok(Outcome { criterion, name, pass, detail, elapsed_secs: start.elapsed().as_secs_f64(), time_limit_secs: limit })
}

pub fn run_all(seed: u64) -> Result<Vec<Outcome>> {
    CRITERIA.iter().map(|&(c, _)| run(c, seed)).collect()
}

type Experiment = Result<(bool, Value, Option<f64>)>;

fn random_bits<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<bool> {
    (0..n).map(|_| rng.random::<bool>()).collect()
}

/// Random verifier in the criterion-1 family; non-adaptive when the index
/// register fits.
fn random_verifier<R: Rng + ?Sized>(rng: &mut R) -> Result<AnyVerifier> {
    let q = rng.random_range(1..=2);
    let k = rng.random_range(1..=2);
    let p2 = rng.random_range(2..=3);
    let n = rng.random_range(0..=2);
    let b = ceil_log2(k * p2);
    let nonadaptive = q * b < 4 && rng.random::<bool>();
    let min_p1 = if nonadaptive { q * b + 1 } else { b + 1 };
    let p1 = rng.random_range(min_p1..=4);
    let regs = Registers { n, p1, k, p2 };
    Ok(if nonadaptive {
        AnyVerifier::NonAdaptive(random_nonadaptive(regs, q, rng)?)
    } else {
        AnyVerifier::Adaptive(random_adaptive(regs, q, rng)?)
    })
}

fn energy_identity(seed: &SeedStream) -> Experiment {
    let mut worst: f64 = 0.0;
    let mut adaptive = 0;
    for i in 0..50 {
        let mut rng = seed.child_rng(format!("verifier={i}"));
        let v = random_verifier(&mut rng)?;
        adaptive += v.is_adaptive() as usize;
        let x = random_bits(v.registers().n, &mut rng);
        let h = exact_hamiltonian(&v, &x)?;
        let nproof = v.registers().proof_qubits();
        for _ in 0..20 {
            let rank = rng.random_range(1..=3);
            let xi = random_density(nproof, rank, &mut rng);
            let p = accept_probability_exact(&v, &x, &xi)?;
            worst = worst.max((p - (1.0 - h.energy(&xi)?)).abs());
        }
    }
    let detail =
        json!({ "verifiers": 50, "adaptive": adaptive, "proofs_each": 20, "max_deviation": worst, "tolerance": 1e-9 });
    Ok((worst <= 1e-9, detail, Some(60.0)))
}

fn reduction_learning(seed: &SeedStream) -> Experiment {
    let mut errors = Vec::new();
    for i in 0..20 {
        let mut rng = seed.child_rng(format!("verifier={i}"));
        let p2 = rng.random_range(2..=3);
        let n = rng.random_range(0..=1);
        let regs = Registers { n, p1: ceil_log2(p2) + 1, k: 1, p2 };
        let v = random_adaptive(regs, 1, &mut rng)?;
        let x = random_bits(n, &mut rng);
        let exact = exact_hamiltonian(&v, &x)?.assemble()?;
        let learned = learn_hamiltonian(&v, &x, 0.1, 0.2, &seed.child(format!("learn={i}")))?;
        errors.push(operator_norm(&(&learned.hamiltonian.assemble()? - &exact))?);
    }
    let good = errors.iter().filter(|&&e| e <= 0.1).count();
    let detail = json!({ "trials": 20, "within_eps": good, "required": 14, "max_error": errors.iter().copied().fold(0.0, f64::max) });
    Ok((good >= 14, detail, Some(600.0)))
}

fn fixed_rounding(seed: &SeedStream) -> Experiment {
    const ETA: usize = 6;
    let fixtures: Vec<(&str, AnyVerifier)> = vec![
        ("accept_always", accept_always(1, 2, 1)?.into()),
        ("reject_always", reject_always(1, 2, 1)?.into()),
        ("uniform_reject", uniform_reject(1, 2)?.into()),
        ("copy", copy_verifier(1, 2, 0)?.into()),
        ("plus_check", plus_check(1, 2, 0)?.into()),
    ];
    let mut per = BTreeMap::new();
    let mut all = true;
    for (name, v) in &fixtures {
        let outputs: Vec<String> = (0..10)
            .map(|r| {
                Ok(learn_hamiltonian_rounded(v, &[], ETA, 0.2, &seed.child(format!("{name}/run={r}")))?
                    .hamiltonian
                    .to_json())
            })
            .collect::<Result<_>>()?;
        let distinct = outputs.iter().collect::<std::collections::BTreeSet<_>>().len();
        all &= distinct == 1;
        per.insert(name.to_string(), distinct);
    }
    Ok((all, json!({ "eta": ETA, "runs": 10, "distinct_outputs": per }), None))
}

fn smoothing(seed: &SeedStream) -> Experiment {
    let (mut entry, mut spectrum, mut lo, mut hi): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let mut split = 0;
    for i in 0..50 {
        let mut rng = seed.child_rng(format!("instance={i}"));
        let n = rng.random_range(2..=5);
        let h = if i % 2 == 0 {
            let q = rng.random_range(1..=2);
            let m = rng.random_range(1..=10);
            random_hamiltonian(n, q, m, false, &mut rng)?
        } else {
            spiky_hamiltonian(n, 10, rng.random_range(0.85..0.95), &mut rng)?
        };
        let sm = smooth(&h)?;
        split += !sm.redistributions.is_empty() as usize;
        let a = h.assemble()?;
        let b = sm.hamiltonian.assemble()?.scale_real(sm.scale);
        entry = entry.max(a.max_abs_diff(&b));
        let ea = hermitian_eigenvalues(&a)?;
        let eb = hermitian_eigenvalues(&b)?;
        spectrum = spectrum.max(ea.iter().zip(&eb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
        for t in &sm.hamiltonian.terms {
            let e = hermitian_eigenvalues(&t.matrix)?;
            lo = lo.min(e[0]);
            hi = hi.max(*e.last().unwrap());
        }
    }
    let pass = entry <= 1e-10 && spectrum <= 1e-10 && lo >= -1e-10 && hi <= 1.0 + 1e-10;
    let detail = json!({
        "instances": 50,
        "with_redistribution": split,
        "max_entry_error": entry,
        "max_spectrum_error": spectrum,
        "min_term_eigenvalue": lo,
        "max_term_norm": hi,
    });
    Ok((pass, detail, None))
}

fn kitaev(seed: &SeedStream) -> Experiment {
    const SHOTS: usize = 10_000;
    let mut worst: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    for i in 0..50 {
        let mut rng = seed.child_rng(format!("case={i}"));
        let n = rng.random_range(2..=3);
        let q = rng.random_range(1..=2);
        let m = rng.random_range(1..=4);
        let h = random_hamiltonian(n, q, m, true, &mut rng)?;
        let v = kitaev_verifier(&h)?;
        let rank = rng.random_range(1..=3);
        let xi = random_density(n, rank, &mut rng);
        let target = 1.0 - h.energy(&xi)?;
        let p = accept_probability_exact(&v, &[], &xi)?;
        worst = worst.max((p - target).abs());
        let hits = Sampler::new(&v, &[], &xi)?.count_accepts(SHOTS, &mut seed.child_rng(format!("mc={i}")))?;
        let sigma = (target * (1.0 - target) / SHOTS as f64).sqrt().max(1.0 / SHOTS as f64);
        worst_z = worst_z.max((hits as f64 / SHOTS as f64 - target).abs() / sigma);
    }
    let detail = json!({ "cases": 50, "max_exact_deviation": worst, "shots": SHOTS, "max_z": worst_z });
    Ok((worst <= 1e-9 && worst_z <= 3.0, detail, None))
}

fn term_sampling(seed: &SeedStream) -> Experiment {
    let (n, m, gamma) = (4, 20, 0.4);
    // Scaled down from δ-driven counts so failures are observable.
    let l = sample_count(gamma, n, 0.5)?;
    let h = random_hamiltonian(n, 2, m, true, &mut seed.child_rng("hamiltonian"))?;
    let exact = h.assemble()?;
    let trials = 200;
    let mut failures = 0;
    for t in 0..trials {
        let g = sample_terms(&h, l, &mut seed.child_rng(format!("trial={t}")))?;
        failures += (operator_norm(&(&exact - &g.assemble()?))? >= gamma / 4.0) as usize;
    }
    let bound = 2f64.powi(n as i32) * (-gamma * gamma * l as f64 / 128.0).exp();
    let freq = failures as f64 / trials as f64;
    let sigma = (bound.min(1.0) * (1.0 - bound.min(1.0)) / trials as f64).sqrt();
    let detail =
        json!({ "l": l, "trials": trials, "failures": failures, "frequency": freq, "bound": bound, "sigma": sigma });
    Ok((freq <= bound + 3.0 * sigma, detail, None))
}

fn tomography(seed: &SeedStream) -> Experiment {
    let (eps, delta, reps) = (0.1, 0.1, 100);
    let (ghz, spec) = ghz_marginals(3)?;
    let random = random_density(3, 2, &mut seed.child_rng("state"));
    let sigma = (delta * (1.0 - delta) / reps as f64).sqrt();
    let mut detail = serde_json::Map::new();
    let mut pass = true;
    for (name, rho) in [("ghz", &ghz), ("random", &random)] {
        let truth: Vec<DensityMatrix> = spec.subsets.iter().map(|s| partial_trace(rho, s)).collect::<Result<_>>()?;
        let mut failures = 0;
        let mut worst: f64 = 0.0;
        for r in 0..reps {
            let est = estimate_marginals(rho, &spec.subsets, eps, delta, &seed.child(format!("{name}/rep={r}")))?;
            let d = est
                .iter()
                .zip(&truth)
                .map(|(e, t)| trace_norm(&(e - t.matrix())))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            worst = worst.max(d);
            failures += (d > eps) as usize;
        }
        let freq = failures as f64 / reps as f64;
        pass &= freq <= delta + 3.0 * sigma;
        detail.insert(name.into(), json!({ "failures": failures, "frequency": freq, "max_distance": worst }));
    }
    detail.insert("marginals".into(), json!(spec.subsets.len()));
    detail.insert("limit".into(), json!(delta + 3.0 * sigma));
    Ok((pass, Value::Object(detail), None))
}

fn weighted_error(seed: &SeedStream) -> Experiment {
    let mut worst_ratio: f64 = 0.0;
    let mut violations = 0;
    for t in 0..100 {
        let mut rng = seed.child_rng(format!("trial={t}"));
        let m = rng.random_range(2..=6);
        let h = random_hamiltonian(3, 2, m, true, &mut rng)?;
        let eps = rng.random_range(0.05..0.5);
        let (eps0, eps1) = (eps / (8.0 * (m * m) as f64), eps / 6.0);
        let assembled = h.assemble()?;
        let eig = hermitian_eigen(&assembled)?;
        // Even trials push every weight and term up along the top eigenvector;
        // odd trials mix signs around the ground state.
        let aligned = t % 2 == 0;
        let witness = eig.vector(if aligned { assembled.rows() - 1 } else { 0 });
        let psi = StateVector::new(witness)?.to_density();
        let weights: Vec<f64> = (0..m)
            .map(|i| {
                let sign = if aligned || rng.random::<bool>() { 1.0 } else { -1.0 };
                (h.weight(i) + sign * eps0).max(0.0)
            })
            .collect();
        let terms: Vec<Term> = h
            .terms
            .iter()
            .map(|term| {
                // Push each term by ε₁ along the direction the global state sees it.
                let local = partial_trace(&psi, &term.support)?;
                let e = hermitian_eigen(local.matrix())?;
                let v = e.vector(e.values.len() - 1);
                let push = ComplexMatrix::outer(&v, &v).scale_real(if aligned { eps1 } else { -eps1 });
                Ok(Term { support: term.support.clone(), matrix: &term.matrix + &push })
            })
            .collect::<Result<_>>()?;
        let tilde = LocalHamiltonian { weights: Some(weights), terms, ..h.clone() };
        let report = weighted_error_check(&h, &tilde, eps0, eps1)?;
        worst_ratio = worst_ratio.max(report.measured / eps);
        violations += (report.measured > eps) as usize;
    }
    let detail = json!({ "perturbations": 100, "violations": violations, "max_error_over_eps": worst_ratio });
    Ok((violations == 0, detail, None))
}

fn strong_reduction(seed: &SeedStream) -> Experiment {
    let (c, s, l) = (1.0 - 1e-4, 0.5, 5);
    let yes = gentle_verifier(c, 0.0)?;
    let no = gentle_verifier(0.5, 0.5)?;
    let honest = strong_error_reduction(&yes, &[], &DensityMatrix::basis(1, 0), l, c, s, &seed.child("yes"))?;
    let plus = StateVector::normalized(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)])?.to_density();
    let mut proofs =
        vec![DensityMatrix::basis(1, 0), DensityMatrix::basis(1, 1), plus, DensityMatrix::maximally_mixed(1)];
    let mut rng = seed.child_rng("proofs");
    proofs.extend((0..6).map(|_| random_pure_state(1, &mut rng).to_density()));
    let (mut no_accept, mut no_majority): (f64, f64) = (0.0, 0.0);
    for (i, xi) in proofs.iter().enumerate() {
        let r = strong_error_reduction(&no, &[], xi, l, c, s, &seed.child(format!("no/{i}")))?;
        no_accept = no_accept.max(r.accept_probability);
        no_majority = no_majority.max(r.majority_accept_probability);
    }
    // Scored on the majority rule; the threshold rule is reported alongside.
    let pass = honest.majority_accept_probability >= 0.99 && no_majority <= 0.2;
    let detail = json!({
        "runs": l,
        "majority": { "yes_accept": honest.majority_accept_probability, "no_accept_max": no_majority },
        "threshold": {
            "required_accepts": honest.required_accepts,
            "yes_accept": honest.accept_probability,
            "no_accept_max": no_accept,
            "pass": honest.accept_probability >= 0.99 && no_accept <= 0.2,
        },
        "yes_disturbance": honest.disturbance,
    });
    Ok((pass, detail, None))
}

fn simulation(seed: &SeedStream) -> Experiment {
    let (c, s) = (1.0, 2.0 / 3.0);
    let fixtures: [(&str, AnyVerifier, bool); 2] =
        [("yes", accept_always(1, 2, 1)?.into(), true), ("no", reject_always(1, 2, 1)?.into(), false)];
    let mut detail = serde_json::Map::new();
    let mut pass = true;
    for (name, v, want) in &fixtures {
        let sim = nonadaptive_simulation(v, &[], c, s, DEFAULT_REPETITION_CAP, &seed.child(format!("{name}/build")))?;
        let base = &sim.composite.base;
        let mut rng = seed.child_rng(format!("{name}/proofs"));
        let reference = path_table(base, &DensityMatrix::basis(2, 0))?;
        let mut deviation: f64 = 0.0;
        for _ in 0..10 {
            let rank = rng.random_range(1..=4);
            let table = path_table(base, &random_density(2, rank, &mut rng))?;
            for key in reference.keys().chain(table.keys()) {
                let d = reference.get(key).unwrap_or(&0.0) - table.get(key).unwrap_or(&0.0);
                deviation = deviation.max(d.abs());
            }
        }
        let mut correct = 0;
        for r in 0..50 {
            let run = seed.child(format!("{name}/run={r}"));
            let sim = nonadaptive_simulation(v, &[], c, s, DEFAULT_REPETITION_CAP, &run)?;
            let xi = random_density(2, 2, &mut run.child_rng("proof"));
            correct += (sim.sample(&xi, &mut run.child_rng("decide"))? == *want) as usize;
        }
        let exact = sim.accept_probability(&DensityMatrix::maximally_mixed(2))?;
        pass &= deviation <= 1e-9 && correct as f64 / 50.0 >= 0.9;
        detail.insert(
            name.to_string(),
            json!({
                "path_deviation": deviation,
                "correct": correct,
                "runs": 50,
                "exact_accept_mixed_proof": exact,
                "params": sim.params,
            }),
        );
    }
    Ok((pass, Value::Object(detail), None))
}

fn path_table<V: QueryVerifier + ?Sized>(v: &V, xi: &DensityMatrix) -> Result<BTreeMap<Vec<usize>, f64>> {
    Ok(path_distribution(v, &[], xi)?.into_iter().map(|p| (p.indices, p.probability)).collect())
}
