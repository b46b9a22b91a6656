//! `qpcp`: command-line access to verifier simulation, Hamiltonian
//! reductions, tomography and the composite protocols.
//!
//! Every command prints a JSON report body on stdout. The body depends only on
//! the inputs and `--seed`; wall time and version go to the `meta` section of
//! the optional `--report` file.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "qpcp", version, about = "Quantum PCP verifier simulator")]
pub struct Cli {
    /// Also write {"body", "meta"} to this file.
    #[arg(long, global = true)]
    report: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Acceptance probability of a verifier on a proof.
    Verify(VerifyArgs),
    /// Local Hamiltonian of a verifier, exact or learned.
    Reduce(ReduceArgs),
    /// Hamiltonian transformations.
    Ham {
        #[command(subcommand)]
        op: HamOp,
    },
    /// Marginal tomography and covering sets.
    Cldm {
        #[command(subcommand)]
        op: CldmOp,
    },
    /// Composite protocols.
    Protocol {
        #[command(subcommand)]
        op: ProtocolOp,
    },
    /// Write a named fixture.
    Fixture(FixtureArgs),
    /// Run the seeded acceptance experiments.
    Repro(ReproArgs),
    /// Run a command described by a JSON config file.
    Run(RunArgs),
}

#[derive(Args, Debug)]
pub struct Seed {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct VerifierInput {
    /// Verifier spec JSON.
    #[arg(long)]
    pub spec: PathBuf,
    /// Input bits, e.g. 0110.
    #[arg(long, default_value = "")]
    pub input: String,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("mode").required(true))]
pub struct VerifyArgs {
    #[command(flatten)]
    pub verifier: VerifierInput,
    /// Proof density matrix JSON; |0…0⟩ when omitted.
    #[arg(long)]
    pub proof: Option<PathBuf>,
    #[arg(long, group = "mode")]
    pub exact: bool,
    #[arg(long, group = "mode")]
    pub shots: Option<usize>,
    #[command(flatten)]
    pub seed: Seed,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("mode").required(true))]
pub struct ReduceArgs {
    #[command(flatten)]
    pub verifier: VerifierInput,
    #[arg(long, group = "mode")]
    pub exact: bool,
    #[arg(long, group = "mode")]
    pub learn: bool,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Snap learned entries to an η-bit grid.
    #[arg(long, value_name = "ETA")]
    pub round: Option<usize>,
    /// Compare against the exact Hamiltonian (learned mode) or check the
    /// energy identity on random proofs (exact mode).
    #[arg(long)]
    pub compare: bool,
    #[command(flatten)]
    pub seed: Seed,
}

#[derive(Args, Debug)]
pub struct HamInput {
    /// Hamiltonian JSON.
    #[arg(long = "in")]
    pub input: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum HamOp {
    Smooth(HamInput),
    Kitaev(HamInput),
    Sample {
        #[command(flatten)]
        h: HamInput,
        #[arg(long)]
        l: usize,
        #[command(flatten)]
        seed: Seed,
    },
    Ground(HamInput),
}

#[derive(Args, Debug)]
pub struct Tomography {
    /// Global state JSON.
    #[arg(long)]
    pub state: PathBuf,
    /// Marginal spec JSON {"subsets", "targets"}.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[command(flatten)]
    pub seed: Seed,
}

#[derive(Subcommand, Debug)]
pub enum CldmOp {
    Estimate(Tomography),
    Decide {
        #[command(flatten)]
        t: Tomography,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
    },
    Cover {
        #[arg(long, default_value_t = 1)]
        qubits: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = qpcp::tomography::DEFAULT_COVER_PATIENCE)]
        patience: usize,
        #[arg(long, default_value_t = 10_000)]
        audit: usize,
        #[command(flatten)]
        seed: Seed,
    },
}

#[derive(Args, Debug)]
pub struct Gap {
    #[arg(long)]
    pub c: f64,
    #[arg(long)]
    pub s: f64,
}

#[derive(Subcommand, Debug)]
pub enum ProtocolOp {
    Nonadaptive {
        #[command(flatten)]
        verifier: VerifierInput,
        #[command(flatten)]
        gap: Gap,
        #[arg(long, default_value_t = qpcp::protocols::DEFAULT_REPETITION_CAP)]
        cap: usize,
        /// Proof to evaluate the composite on; |0…0⟩ when omitted.
        #[arg(long)]
        proof: Option<PathBuf>,
        #[command(flatten)]
        seed: Seed,
    },
    Qcma {
        #[command(flatten)]
        verifier: VerifierInput,
        #[command(flatten)]
        gap: Gap,
        #[command(flatten)]
        seed: Seed,
    },
    Ksep {
        /// Hamiltonian JSON.
        #[arg(long)]
        spec: PathBuf,
        /// Witness JSON {"classical", "quantum"}.
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        /// Number of subsystems; taken from the witness when omitted.
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        seed: Seed,
    },
    Strongred {
        #[command(flatten)]
        verifier: VerifierInput,
        #[command(flatten)]
        gap: Gap,
        #[arg(long)]
        proof: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        l: usize,
        #[command(flatten)]
        seed: Seed,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixtureKind {
    RejectAlways,
    AcceptAlways,
    RandomQ1,
    RandomQ2,
    GhzCldm,
    ProductKsep,
}

#[derive(Args, Debug)]
pub struct FixtureArgs {
    pub kind: FixtureKind,
    /// Qubits of the GHZ state.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Write one file per part into this directory instead of printing.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub seed: Seed,
}

#[derive(Args, Debug)]
pub struct ReproArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=10))]
    pub criterion: Option<u8>,
    #[command(flatten)]
    pub seed: Seed,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
}

/// What a command produced: a deterministic body and whether its checks held.
pub struct Output {
    pub body: Value,
    pub ok: bool,
    /// Extra entries for the meta section.
    pub meta: Value,
}

impl Output {
    pub fn ok(body: Value) -> Self {
        Self { body, ok: true, meta: Value::Null }
    }

    pub fn checked(body: Value, ok: bool) -> Self {
        Self { body, ok, meta: Value::Null }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
}

impl From<qpcp::QpcpError> for CliError {
    fn from(e: qpcp::QpcpError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

pub fn write_report(path: &PathBuf, body: &Value, meta: Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(&json!({ "body": body, "meta": meta })).expect("json value");
    std::fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match commands::dispatch(cli.command) {
        Ok(out) => {
            let text = serde_json::to_string_pretty(&out.body).expect("json value");
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if let Some(path) = &cli.report {
                let mut meta = json!({
                    "version": env!("CARGO_PKG_VERSION"),
                    "wall_secs": start.elapsed().as_secs_f64(),
                });
                if let Value::Object(extra) = out.meta {
                    meta.as_object_mut().expect("object").extend(extra);
                }
                if let Err(e) = write_report(path, &out.body, meta) {
                    return fail(e);
                }
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> ExitCode {
    match &e {
        CliError::Usage(m) => eprintln!("error: {m}"),
        CliError::Io(m) => eprintln!("i/o error: {m}"),
    }
    ExitCode::from(e.code())
}
