use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use qpcp::fixtures::{accept_always, ghz_marginals, product_separable, random_adaptive, reject_always};
use qpcp::hamiltonian::{ground_energy, kitaev_verifier, sample_terms, smooth};
use qpcp::linalg::random::random_density;
use qpcp::linalg::{operator_norm, parse_bits, trace_norm, DensityMatrix};
use qpcp::protocols::{
    exact_oracle, k_separable_check, nonadaptive_simulation, qcma_pipeline, strong_error_reduction, SeparableWitness,
};
use qpcp::reduction::{exact_hamiltonian, learn_hamiltonian, learn_hamiltonian_rounded, LocalHamiltonian};
use qpcp::rng::SeedStream;
use qpcp::tomography::{audit, build_covering_set, cldm_decide, estimate_marginals, marginal_shots, MarginalSpec};
use qpcp::verifier::{
    accept_probability_exact, path_distribution, AnyVerifier, QueryVerifier, Registers, Sampler, VerifierSpec,
};
use serde_json::{json, Value};

use crate::{
    write_report, CldmOp, Cli, CliError, Command, FixtureArgs, FixtureKind, HamOp, Output, ProtocolOp, ReduceArgs,
    ReproArgs, RunArgs, Tomography, VerifierInput, VerifyArgs,
};

/// Random proofs used by the energy-identity check in `reduce --exact`.
const IDENTITY_PROOFS: usize = 20;
const IDENTITY_TOL: f64 = 1e-9;

pub fn dispatch(command: Command) -> Result<Output, CliError> {
    match command {
        Command::Verify(a) => verify(a),
        Command::Reduce(a) => reduce(a),
        Command::Ham { op } => ham(op),
        Command::Cldm { op } => cldm(op),
        Command::Protocol { op } => protocol(op),
        Command::Fixture(a) => fixture(a),
        Command::Repro(a) => repro(a),
        Command::Run(a) => run(a),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn in_file<T>(path: &Path, r: qpcp::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn parse_json<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable report")
}

fn load_verifier(input: &VerifierInput) -> Result<(AnyVerifier, Vec<bool>), CliError> {
    let v = in_file(&input.spec, VerifierSpec::from_json(&read(&input.spec)?))?;
    let x = parse_bits(&input.input)?;
    Ok((v, x))
}

fn load_proof(path: &Option<PathBuf>, qubits: usize) -> Result<DensityMatrix, CliError> {
    match path {
        Some(p) => parse_json(p),
        None => Ok(DensityMatrix::basis(qubits, 0)),
    }
}

fn load_hamiltonian(path: &Path) -> Result<LocalHamiltonian, CliError> {
    in_file(path, LocalHamiltonian::from_json(&read(path)?))
}

fn verify(a: VerifyArgs) -> Result<Output, CliError> {
    let (v, x) = load_verifier(&a.verifier)?;
    let xi = load_proof(&a.proof, v.registers().proof_qubits())?;
    if let Some(shots) = a.shots {
        if shots == 0 {
            return Err(CliError::Usage("--shots must be positive".into()));
        }
        let mut rng = SeedStream::new(a.seed.seed).child_rng("verify");
        let accepts = Sampler::new(&v, &x, &xi)?.count_accepts(shots, &mut rng)?;
        let mean = accepts as f64 / shots as f64;
        return Ok(Output::ok(json!({
            "mode": "sampled",
            "seed": a.seed.seed,
            "shots": shots,
            "accepts": accepts,
            "accept_probability": mean,
            "standard_error": (mean * (1.0 - mean) / shots as f64).sqrt(),
        })));
    }
    let p = accept_probability_exact(&v, &x, &xi)?;
    let paths = path_distribution(&v, &x, &xi)?;
    Ok(Output::checked(
        json!({ "mode": "exact", "accept_probability": p, "paths": paths }),
        (-1e-12..=1.0 + 1e-12).contains(&p),
    ))
}

fn reduce(a: ReduceArgs) -> Result<Output, CliError> {
    let (v, x) = load_verifier(&a.verifier)?;
    let seed = SeedStream::new(a.seed.seed);
    if a.exact {
        let h = exact_hamiltonian(&v, &x)?;
        let n = v.registers().proof_qubits();
        let mut residual: f64 = 0.0;
        for i in 0..IDENTITY_PROOFS {
            let mut rng = seed.child_rng(format!("identity/proof={i}"));
            let xi = random_density(n, 1 + i % (1 << n).min(4), &mut rng);
            let p = accept_probability_exact(&v, &x, &xi)?;
            residual = residual.max((p - (1.0 - h.energy(&xi)?)).abs());
        }
        let ok = residual <= IDENTITY_TOL;
        return Ok(Output::checked(
            json!({
                "mode": "exact",
                "hamiltonian": h,
                "energy_identity": { "proofs": IDENTITY_PROOFS, "max_residual": residual, "tolerance": IDENTITY_TOL },
            }),
            ok,
        ));
    }
    let learned = match a.round {
        Some(eta) => learn_hamiltonian_rounded(&v, &x, eta, a.delta, &seed.child("learn"))?,
        None => learn_hamiltonian(&v, &x, a.eps, a.delta, &seed.child("learn"))?,
    };
    let mut body = json!({
        "mode": if a.round.is_some() { "learned-rounded" } else { "learned" },
        "seed": a.seed.seed,
        "params": learned.params,
        "hamiltonian": learned.hamiltonian,
    });
    let mut ok = true;
    if a.compare {
        let exact = exact_hamiltonian(&v, &x)?;
        let dist = operator_norm(&(&learned.hamiltonian.assemble()? - &exact.assemble()?))?;
        ok = dist <= learned.params.eps;
        body["comparison"] = json!({ "operator_norm_error": dist, "within_eps": ok });
    }
    Ok(Output::checked(body, ok))
}

fn ham(op: HamOp) -> Result<Output, CliError> {
    match op {
        HamOp::Smooth(i) => {
            let h = load_hamiltonian(&i.input)?;
            Ok(Output::ok(to_value(&smooth(&h)?)))
        }
        HamOp::Kitaev(i) => {
            let h = load_hamiltonian(&i.input)?;
            Ok(Output::ok(to_value(&VerifierSpec::from(&kitaev_verifier(&h)?))))
        }
        HamOp::Sample { h, l, seed } => {
            let h = load_hamiltonian(&h.input)?;
            let g = sample_terms(&h, l, &mut SeedStream::new(seed.seed).child_rng("sample"))?;
            Ok(Output::ok(to_value(&g)))
        }
        HamOp::Ground(i) => {
            let h = load_hamiltonian(&i.input)?;
            Ok(Output::ok(json!({ "ground_energy": ground_energy(&h)? })))
        }
    }
}

fn estimates(t: &Tomography) -> Result<(MarginalSpec, Vec<qpcp::linalg::ComplexMatrix>, Value), CliError> {
    let rho: DensityMatrix = parse_json(&t.state)?;
    let spec = in_file(&t.spec, MarginalSpec::from_json(&read(&t.spec)?))?;
    let est = estimate_marginals(&rho, &spec.subsets, t.eps, t.delta, &SeedStream::new(t.seed.seed).child("cldm"))?;
    let m = spec.subsets.len();
    let shots = spec
        .subsets
        .iter()
        .map(|c| marginal_shots(t.eps, t.delta, m, 1 << c.len()))
        .collect::<qpcp::Result<Vec<_>>>()?;
    let errors = est
        .iter()
        .zip(&spec.subsets)
        .map(|(e, c)| trace_norm(&(e - qpcp::linalg::partial_trace(&rho, c)?.matrix())))
        .collect::<qpcp::Result<Vec<_>>>()?;
    let body = json!({
        "seed": t.seed.seed,
        "eps": t.eps,
        "delta": t.delta,
        "shots_per_coefficient": shots,
        "estimates": est,
        "errors_vs_state": errors,
    });
    Ok((spec, est, body))
}

fn cldm(op: CldmOp) -> Result<Output, CliError> {
    match op {
        CldmOp::Estimate(t) => Ok(Output::ok(estimates(&t)?.2)),
        CldmOp::Decide { t, alpha } => {
            let (spec, est, mut body) = estimates(&t)?;
            body["decision"] = to_value(&cldm_decide(&est, &spec.targets, alpha, t.eps)?);
            Ok(Output::ok(body))
        }
        CldmOp::Cover { qubits, eps, patience, audit: samples, seed } => {
            let seed = SeedStream::new(seed.seed);
            let cs = build_covering_set(qubits, eps, patience, &mut seed.child_rng("cover"))?;
            let report = audit(&cs, samples, &mut seed.child_rng("audit"))?;
            let ok = report.failures == 0;
            Ok(Output::checked(json!({ "cover": cs, "size": cs.members.len(), "audit": report }), ok))
        }
    }
}

fn protocol(op: ProtocolOp) -> Result<Output, CliError> {
    match op {
        ProtocolOp::Nonadaptive { verifier, gap, cap, proof, seed } => {
            let (v, x) = load_verifier(&verifier)?;
            let sim = nonadaptive_simulation(&v, &x, gap.c, gap.s, cap, &SeedStream::new(seed.seed))?;
            let xi = load_proof(&proof, v.registers().proof_qubits())?;
            let p = sim.accept_probability(&xi)?;
            Ok(Output::ok(json!({
                "params": sim.params,
                "learned": { "params": sim.learned.params, "hamiltonian": sim.learned.hamiltonian },
                "smoothed": sim.smoothed,
                "composite": { "repetitions": sim.composite.repetitions, "threshold": sim.composite.threshold },
                "accept_probability": p,
            })))
        }
        ProtocolOp::Qcma { verifier, gap, seed } => {
            let (v, x) = load_verifier(&verifier)?;
            let (report, learned) = qcma_pipeline(&v, &x, gap.c, gap.s, exact_oracle, &SeedStream::new(seed.seed))?;
            Ok(Output::ok(
                json!({ "report": report, "learned": { "params": learned.params, "hamiltonian": learned.hamiltonian } }),
            ))
        }
        ProtocolOp::Ksep { spec, witness, a, b, k, seed } => {
            let h = load_hamiltonian(&spec)?;
            let w: SeparableWitness = parse_json(&witness)?;
            let k = k.unwrap_or_else(|| w.classical.first().map_or(1, Vec::len));
            let r = k_separable_check(&h, a, b, k, &w, &SeedStream::new(seed.seed))?;
            Ok(Output::ok(to_value(&r)))
        }
        ProtocolOp::Strongred { verifier, gap, proof, l, seed } => {
            let (v, x) = load_verifier(&verifier)?;
            let xi = load_proof(&proof, v.registers().proof_qubits())?;
            let r = strong_error_reduction(&v, &x, &xi, l, gap.c, gap.s, &SeedStream::new(seed.seed))?;
            Ok(Output::ok(to_value(&r)))
        }
    }
}

/// Named parts of a fixture, each a separate file under `--out`.
fn fixture_parts(a: &FixtureArgs) -> Result<Vec<(&'static str, Value)>, CliError> {
    let spec = |v: &AnyVerifier| to_value(&VerifierSpec::from(v));
    let random = |q: usize| -> Result<AnyVerifier, CliError> {
        let mut rng = SeedStream::new(a.seed.seed).child_rng(format!("fixture/random-q{q}"));
        Ok(random_adaptive(Registers { n: 1, p1: 3, k: 1, p2: 2 }, q, &mut rng)?.into())
    };
    Ok(match a.kind {
        FixtureKind::RejectAlways => vec![("verifier", spec(&reject_always(1, 2, 1)?.into()))],
        FixtureKind::AcceptAlways => vec![("verifier", spec(&accept_always(1, 2, 1)?.into()))],
        FixtureKind::RandomQ1 => vec![("verifier", spec(&random(1)?))],
        FixtureKind::RandomQ2 => vec![("verifier", spec(&random(2)?))],
        FixtureKind::GhzCldm => {
            let (state, marginals) = ghz_marginals(a.n)?;
            vec![("state", to_value(&state)), ("marginals", to_value(&marginals))]
        }
        FixtureKind::ProductKsep => {
            let (h, w) = product_separable()?;
            vec![("hamiltonian", to_value(&h)), ("witness", to_value(&w))]
        }
    })
}

fn fixture(a: FixtureArgs) -> Result<Output, CliError> {
    let parts = fixture_parts(&a)?;
    let Some(dir) = &a.out else {
        let body = if parts.len() == 1 {
            parts.into_iter().next().expect("one part").1
        } else {
            Value::Object(parts.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
        };
        return Ok(Output::ok(body));
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let kind = a.kind.to_possible_value().expect("named variant");
    let single = parts.len() == 1;
    let mut written = Vec::new();
    for (part, value) in parts {
        let name = if single { kind.get_name().to_string() } else { format!("{}-{part}", kind.get_name()) };
        let path = dir.join(format!("{name}.json"));
        let text = serde_json::to_string_pretty(&value).expect("json value") + "\n";
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        written.push(format!("{name}.json"));
    }
    Ok(Output::ok(json!({ "written": written })))
}

fn repro(a: ReproArgs) -> Result<Output, CliError> {
    let criteria: Vec<u8> = match a.criterion {
        Some(c) => vec![c],
        None => qpcp::repro::CRITERIA.iter().map(|(c, _)| *c).collect(),
    };
    let mut outcomes = Vec::new();
    let mut timing = serde_json::Map::new();
    for c in criteria {
        let o = qpcp::repro::run(c, a.seed.seed)?;
        timing.insert(c.to_string(), json!(o.elapsed_secs));
        outcomes.push(o);
    }
    let ok = outcomes.iter().all(|o| o.pass);
    Ok(Output {
        body: json!({ "seed": a.seed.seed, "outcomes": outcomes }),
        ok,
        meta: json!({ "elapsed_secs": timing }),
    })
}

fn run(a: RunArgs) -> Result<Output, CliError> {
    let text = read(&a.config)?;
    if text.trim().is_empty() {
        return Err(CliError::Usage(format!("{}: empty config", a.config.display())));
    }
    let config: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", a.config.display())))?;
    let args: Vec<String> = match config.get("args") {
        Some(Value::Array(items)) if !items.is_empty() => items
            .iter()
            .map(|v| v.as_str().map(str::to_string))
            .collect::<Option<_>>()
            .ok_or_else(|| CliError::Usage(format!("{}: field \"args\" must hold strings", a.config.display())))?,
        _ => {
            return Err(CliError::Usage(format!(
                "{}: field \"args\" must be a non-empty list of strings",
                a.config.display()
            )))
        }
    };
    let report = match config.get("report") {
        None => None,
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(_) => return Err(CliError::Usage(format!("{}: field \"report\" must be a path", a.config.display()))),
    };
    let cli = Cli::try_parse_from(std::iter::once("qpcp".to_string()).chain(args))
        .map_err(|e| CliError::Usage(format!("{}: {e}", a.config.display())))?;
    if matches!(cli.command, Command::Run(_)) {
        return Err(CliError::Usage("a config may not invoke run".into()));
    }
    // Paths in the config are relative to the config file.
    if let Some(dir) = a.config.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::env::set_current_dir(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    let start = Instant::now();
    let out = dispatch(cli.command)?;
    let body = json!({ "config": config, "ok": out.ok, "output": out.body });
    if let Some(path) = report {
        let meta = json!({ "version": env!("CARGO_PKG_VERSION"), "wall_secs": start.elapsed().as_secs_f64() });
        write_report(&path, &body, meta)?;
    }
    Ok(Output { body, ok: out.ok, meta: out.meta })
}
