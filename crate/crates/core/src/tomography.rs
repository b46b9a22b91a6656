//! Pauli-basis estimation of local marginals, the consistency test for local
//! density matrices, and greedy ε-covering sets of states.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{QpcpError, Result};
use crate::linalg::random::random_density_purified;
use crate::linalg::{partial_trace, pauli_matrix, trace_distance, trace_norm, ComplexMatrix, DensityMatrix, PauliWord};
use crate::rng::SeedStream;

/// Mean of `shots` ±1 outcomes of measuring P on fresh copies of ρ.
pub fn pauli_expectation<R: Rng + ?Sized>(rho: &DensityMatrix, w: &PauliWord, shots: u64, rng: &mut R) -> Result<f64> {
    if shots == 0 {
        return Err(QpcpError::InvalidParameter("shots must be positive".into()));
    }
    if w.num_qubits() != rho.num_qubits() {
        return Err(QpcpError::DimensionMismatch(format!(
            "word on {} qubits, state on {}",
            w.num_qubits(),
            rho.num_qubits()
        )));
    }
    let plus = ((1.0 + rho.expectation(&pauli_matrix(w))?) / 2.0).clamp(0.0, 1.0);
    let ups = Binomial::new(shots, plus)
        .map_err(|e| QpcpError::InvalidParameter(format!("binomial sampler: {e}")))?
        .sample(rng);
    Ok(2.0 * ups as f64 / shots as f64 - 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalSpec {
    pub subsets: Vec<Vec<usize>>,
    pub targets: Vec<DensityMatrix>,
}

impl MarginalSpec {
    pub fn new(subsets: Vec<Vec<usize>>, targets: Vec<DensityMatrix>) -> Result<Self> {
        let s = Self { subsets, targets };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.subsets.len() != self.targets.len() {
            return Err(QpcpError::DimensionMismatch(format!(
                "{} subsets, {} targets",
                self.subsets.len(),
                self.targets.len()
            )));
        }
        for (c, t) in self.subsets.iter().zip(&self.targets) {
            if c.len() != t.num_qubits() {
                return Err(QpcpError::DimensionMismatch(format!(
                    "subset {c:?} with a {}-qubit target",
                    t.num_qubits()
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    /// The spec whose targets are the exact marginals of ρ.
    pub fn of_state(rho: &DensityMatrix, subsets: Vec<Vec<usize>>) -> Result<Self> {
        let targets = subsets.iter().map(|c| partial_trace(rho, c)).collect::<Result<_>>()?;
        Self::new(subsets, targets)
    }
}

/// Shots per Pauli coefficient: accuracy eps/d² at confidence 1 − δ/(m d²).
pub fn marginal_shots(eps: f64, delta: f64, m: usize, d: usize) -> Result<u64> {
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(QpcpError::InvalidParameter(format!("eps = {eps}, delta = {delta} must lie in (0, 1)")));
    }
    let d2 = (d * d) as f64;
    let t = eps / d2;
    Ok((2.0 * (2.0 * m as f64 * d2 / delta).ln() / (t * t)).ceil() as u64)
}

/// ρ̃ = (1/d) Σ_P c̃_P P from the given coefficients, indexed as [`PauliWord::from_index`].
pub fn reconstruct(coefficients: &[f64], num_qubits: usize) -> ComplexMatrix {
    let d = 1usize << num_qubits;
    let mut out = ComplexMatrix::zeros(d, d);
    for (j, &c) in coefficients.iter().enumerate() {
        out = &out + &pauli_matrix(&PauliWord::from_index(j, num_qubits)).scale_real(c / d as f64);
    }
    out
}

/// Estimates every marginal ρ_{C_i} so that ‖ρ̃_i − ρ_i‖₁ ≤ eps for all i with
/// probability ≥ 1 − delta. The identity coefficient is fixed to 1, so estimates
/// are Hermitian with unit trace but need not be PSD.
pub fn estimate_marginals(
    rho: &DensityMatrix,
    subsets: &[Vec<usize>],
    eps: f64,
    delta: f64,
    seed: &SeedStream,
) -> Result<Vec<ComplexMatrix>> {
    let m = subsets.len();
    subsets
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let marginal = partial_trace(rho, c)?;
            let nq = c.len();
            let d = 1usize << nq;
            let shots = marginal_shots(eps, delta, m, d)?;
            let coefficients = (0..d * d)
                .map(|j| {
                    if j == 0 {
                        return Ok(1.0);
                    }
                    let w = PauliWord::from_index(j, nq);
                    pauli_expectation(&marginal, &w, shots, &mut seed.child_rng(format!("marginal={i}/word={w}")))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(reconstruct(&coefficients, nq))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CldmDecision {
    pub accept: bool,
    /// max_i ‖ρ̃_i − ρ_i‖₁ (full trace norm).
    pub max_distance: f64,
    pub threshold: f64,
}

/// Accepts iff every estimate is within trace norm α + ε of its target.
pub fn cldm_decide(
    estimates: &[ComplexMatrix],
    targets: &[DensityMatrix],
    alpha: f64,
    eps: f64,
) -> Result<CldmDecision> {
    if estimates.len() != targets.len() {
        return Err(QpcpError::DimensionMismatch(format!("{} estimates, {} targets", estimates.len(), targets.len())));
    }
    let mut max_distance: f64 = 0.0;
    for (e, t) in estimates.iter().zip(targets) {
        if e.rows() != t.dim() || e.cols() != t.dim() {
            return Err(QpcpError::DimensionMismatch(format!("estimate of size {} vs target {}", e.rows(), t.dim())));
        }
        max_distance = max_distance.max(trace_norm(&(e - t.matrix()))?);
    }
    let threshold = alpha + eps;
    Ok(CldmDecision { accept: max_distance <= threshold, max_distance, threshold })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CopyCount {
    pub l: u64,
    /// (2lδ² + l²n ln 2)/(2δ²).
    pub k: f64,
}

pub const CLDM_CONSTANT: f64 = 16.0;

/// l = ⌈C·m·q·16^q·ln(m/δ)/ε²⌉ with C = 16, and the de Finetti copy count k.
pub fn cldm_copy_count(m: usize, q: usize, n: usize, eps: f64, delta: f64) -> Result<CopyCount> {
    cldm_copy_count_with(CLDM_CONSTANT, m, q, n, eps, delta)
}

pub fn cldm_copy_count_with(constant: f64, m: usize, q: usize, n: usize, eps: f64, delta: f64) -> Result<CopyCount> {
    if m == 0 || !(eps > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(QpcpError::InvalidParameter(format!("m = {m}, eps = {eps}, delta = {delta}")));
    }
    let l = (constant * m as f64 * q as f64 * 16f64.powi(q as i32) * (m as f64 / delta).ln() / (eps * eps)).ceil();
    let l = l.max(1.0);
    let k = (2.0 * l * delta * delta + l * l * n as f64 * std::f64::consts::LN_2) / (2.0 * delta * delta);
    Ok(CopyCount { l: l as u64, k })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringSet {
    pub num_qubits: usize,
    pub epsilon: f64,
    pub members: Vec<DensityMatrix>,
}

pub const DEFAULT_COVER_PATIENCE: usize = 10_000;

/// Greedy cover: draw states from the induced measure and keep any that is
/// farther than eps from every member, until `patience` draws in a row are kept out.
pub fn build_covering_set<R: Rng + ?Sized>(
    num_qubits: usize,
    eps: f64,
    patience: usize,
    rng: &mut R,
) -> Result<CoveringSet> {
    if num_qubits > 2 {
        return Err(QpcpError::InvalidParameter(format!("covering sets support d <= 4, got {num_qubits} qubits")));
    }
    if !(eps > 0.0) {
        return Err(QpcpError::InvalidParameter(format!("eps = {eps} must be positive")));
    }
    let mut members = vec![random_density_purified(num_qubits, rng)];
    let mut misses = 0;
    while misses < patience {
        let sample = random_density_purified(num_qubits, rng);
        if nearest(&sample, &members)?.1 > eps {
            members.push(sample);
            misses = 0;
        } else {
            misses += 1;
        }
    }
    Ok(CoveringSet { num_qubits, epsilon: eps, members })
}

fn nearest(rho: &DensityMatrix, members: &[DensityMatrix]) -> Result<(usize, f64)> {
    let mut best = (usize::MAX, f64::INFINITY);
    for (i, m) in members.iter().enumerate() {
        let d = trace_distance(rho, m)?;
        if d < best.1 {
            best = (i, d);
        }
    }
    if best.0 == usize::MAX {
        return Err(QpcpError::EmptyCoveringSet);
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverAudit {
    pub samples: usize,
    pub failures: usize,
    pub max_distance: f64,
}

/// Distance from `samples` fresh random states to the nearest member.
pub fn audit<R: Rng + ?Sized>(cs: &CoveringSet, samples: usize, rng: &mut R) -> Result<CoverAudit> {
    let mut failures = 0;
    let mut max_distance: f64 = 0.0;
    for _ in 0..samples {
        let d = nearest(&random_density_purified(cs.num_qubits, rng), &cs.members)?.1;
        max_distance = max_distance.max(d);
        failures += usize::from(d > cs.epsilon);
    }
    Ok(CoverAudit { samples, failures, max_distance })
}

/// Closest member in trace distance; ties go to the lowest index.
pub fn project_to_covering<'a>(rho: &DensityMatrix, cs: &'a CoveringSet) -> Result<(usize, &'a DensityMatrix)> {
    if rho.num_qubits() != cs.num_qubits {
        return Err(QpcpError::DimensionMismatch(format!(
            "state on {} qubits, cover on {}",
            rho.num_qubits(),
            cs.num_qubits
        )));
    }
    let (i, _) = nearest(rho, &cs.members)?;
    Ok((i, &cs.members[i]))
}
