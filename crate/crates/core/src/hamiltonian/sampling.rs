use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::Serialize;

use crate::error::{QpcpError, Result};
use crate::linalg::{operator_norm, ComplexMatrix};
use crate::reduction::{LocalHamiltonian, Term};

/// l = ⌈(128/γ²)(n ln 2 + ln(1/δ))⌉.
pub fn sample_count(gamma: f64, n: usize, delta: f64) -> Result<usize> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(QpcpError::InvalidParameter(format!("gamma = {gamma} must lie in (0, 1]")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(QpcpError::InvalidParameter(format!("delta = {delta} must lie in (0, 1]")));
    }
    let l = 128.0 / (gamma * gamma) * (n as f64 * std::f64::consts::LN_2 + (1.0 / delta).ln());
    Ok(l.ceil().max(0.0) as usize)
}

/// G = (1/l) Σ_k H_{i_k} with i_k drawn i.i.d. from the term weights.
pub fn sample_terms<R: Rng + ?Sized>(h: &LocalHamiltonian, l: usize, rng: &mut R) -> Result<LocalHamiltonian> {
    if l == 0 {
        return Err(QpcpError::InvalidParameter("l must be positive".into()));
    }
    let weights =
        h.weights.as_ref().ok_or_else(|| QpcpError::Precondition("term sampling needs weighted terms".into()))?;
    let dist = WeightedIndex::new(weights).map_err(|e| QpcpError::InvalidParameter(format!("weights: {e}")))?;
    let terms: Vec<Term> = (0..l).map(|_| h.terms[dist.sample(rng)].clone()).collect();
    LocalHamiltonian::new(h.num_qubits, h.locality, terms, Some(vec![1.0 / l as f64; l]))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedErrorReport {
    pub m: usize,
    pub eps0: f64,
    pub eps1: f64,
    /// Smallest ε for which both thresholds ε₀ ≤ ε/(8m²) and ε₁ ≤ ε/6 hold.
    pub eps_implied: f64,
    /// 2ε₁ + ε₁² + 4m²ε₀.
    pub bound: f64,
    /// ‖H − Σ p̂ᵢ Ĥᵢ‖.
    pub measured: f64,
    pub max_weight_error: f64,
    pub max_term_error: f64,
    pub preconditions_hold: bool,
    pub within_bound: bool,
}

/// Compares H = Σ pᵢHᵢ with the renormalized estimate Σ p̂ᵢĤᵢ, where
/// p̂ = p̃/Σp̃ and Ĥᵢ = H̃ᵢ / max(maxⱼ‖H̃ⱼ‖, 1).
pub fn weighted_error_check(
    h: &LocalHamiltonian,
    h_tilde: &LocalHamiltonian,
    eps0: f64,
    eps1: f64,
) -> Result<WeightedErrorReport> {
    let m = h.num_terms();
    if h_tilde.num_terms() != m || h.num_qubits != h_tilde.num_qubits {
        return Err(QpcpError::DimensionMismatch("hamiltonians have different shapes".into()));
    }
    for (a, b) in h.terms.iter().zip(&h_tilde.terms) {
        if a.support != b.support {
            return Err(QpcpError::DimensionMismatch(format!("supports {:?} and {:?} differ", a.support, b.support)));
        }
    }
    let p: Vec<f64> = (0..m).map(|i| h.weight(i)).collect();
    let pt: Vec<f64> = (0..m).map(|i| h_tilde.weight(i)).collect();
    let max_weight_error = p.iter().zip(&pt).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let term_errors: Vec<f64> = h
        .terms
        .iter()
        .zip(&h_tilde.terms)
        .map(|(a, b)| operator_norm(&(&a.matrix - &b.matrix)))
        .collect::<Result<_>>()?;
    let max_term_error = term_errors.iter().copied().fold(0.0, f64::max);
    let tilde_norms: Vec<f64> = h_tilde.terms.iter().map(|t| operator_norm(&t.matrix)).collect::<Result<_>>()?;
    let divisor = tilde_norms.iter().copied().fold(1.0, f64::max);
    let w: f64 = pt.iter().sum();
    let mut hat_terms = Vec::with_capacity(m);
    for t in &h_tilde.terms {
        hat_terms.push(Term { support: t.support.clone(), matrix: t.matrix.scale_real(1.0 / divisor) });
    }
    let hat_weights: Vec<f64> = pt.iter().map(|x| x / w).collect();
    let hat = LocalHamiltonian {
        num_qubits: h.num_qubits,
        locality: h.locality.max(h_tilde.locality),
        terms: hat_terms,
        weights: Some(hat_weights),
    };
    let exact = LocalHamiltonian { weights: Some(p), ..h.clone() };
    let diff: ComplexMatrix = &exact.assemble()? - &hat.assemble()?;
    let measured = operator_norm(&diff)?;
    let mf = m as f64;
    let bound = 2.0 * eps1 + eps1 * eps1 + 4.0 * mf * mf * eps0;
    let eps_implied = (8.0 * mf * mf * eps0).max(6.0 * eps1);
    let preconditions_hold = max_weight_error <= eps0 * (1.0 + 1e-12) + 1e-15
        && max_term_error <= eps1 * (1.0 + 1e-9) + 1e-12
        && eps0 < 1.0 / (2.0 * mf);
    Ok(WeightedErrorReport {
        m,
        eps0,
        eps1,
        eps_implied,
        bound,
        measured,
        max_weight_error,
        max_term_error,
        preconditions_hold,
        within_bound: measured <= bound + 1e-12 && measured <= eps_implied + 1e-12,
    })
}
