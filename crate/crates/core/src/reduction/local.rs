use serde::{Deserialize, Serialize};

use crate::error::{QpcpError, Result};
use crate::linalg::{
    check_cap, embed_operator, min_eigenvalue, operator_norm, partial_trace, ComplexMatrix, DensityMatrix,
};

pub const TERM_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    /// Sorted qubit indices; the r-th tensor factor of `matrix` is `support[r]`.
    pub support: Vec<usize>,
    pub matrix: ComplexMatrix,
}

/// Σ wᵢ Hᵢ over `num_qubits` qubits, with wᵢ = 1 when no weights are given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalHamiltonian {
    pub num_qubits: usize,
    pub locality: usize,
    pub terms: Vec<Term>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl LocalHamiltonian {
    pub fn new(num_qubits: usize, locality: usize, terms: Vec<Term>, weights: Option<Vec<f64>>) -> Result<Self> {
        let h = Self { num_qubits, locality, terms, weights };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, t) in self.terms.iter().enumerate() {
            if t.support.len() > self.locality {
                return Err(QpcpError::InvalidParameter(format!(
                    "term {i} acts on {} qubits, locality is {}",
                    t.support.len(),
                    self.locality
                )));
            }
            if t.support.windows(2).any(|w| w[0] >= w[1]) || t.support.iter().any(|&q| q >= self.num_qubits) {
                return Err(QpcpError::InvalidParameter(format!("term {i} has support {:?}", t.support)));
            }
            let dim = 1usize << t.support.len();
            if t.matrix.rows() != dim || t.matrix.cols() != dim {
                return Err(QpcpError::DimensionMismatch(format!(
                    "term {i} matrix is {}x{} on {} qubits",
                    t.matrix.rows(),
                    t.matrix.cols(),
                    t.support.len()
                )));
            }
            let deviation = t.matrix.hermiticity_error();
            if deviation > TERM_TOL {
                return Err(QpcpError::NotHermitian { deviation });
            }
        }
        if let Some(w) = &self.weights {
            if w.len() != self.terms.len() {
                return Err(QpcpError::DimensionMismatch(format!(
                    "{} weights for {} terms",
                    w.len(),
                    self.terms.len()
                )));
            }
            if w.iter().any(|&p| !(p >= 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > TERM_TOL {
                return Err(QpcpError::InvalidParameter("weights must be a probability distribution".into()));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let h: Self = serde_json::from_str(text)?;
        h.validate()?;
        Ok(h)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("hamiltonian serializes")
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Dense 2ⁿ×2ⁿ operator.
    pub fn assemble(&self) -> Result<ComplexMatrix> {
        check_cap(self.num_qubits)?;
        let dim = 1usize << self.num_qubits;
        let mut full = ComplexMatrix::zeros(dim, dim);
        for (i, t) in self.terms.iter().enumerate() {
            let lifted = embed_operator(&t.matrix, &t.support, self.num_qubits)?;
            full = &full + &lifted.scale_real(self.weight(i));
        }
        Ok(full)
    }

    /// tr[H ξ] through the marginals of ξ.
    pub fn energy(&self, xi: &DensityMatrix) -> Result<f64> {
        if xi.num_qubits() != self.num_qubits {
            return Err(QpcpError::DimensionMismatch(format!(
                "state on {} qubits, hamiltonian on {}",
                xi.num_qubits(),
                self.num_qubits
            )));
        }
        let mut total = 0.0;
        for (i, t) in self.terms.iter().enumerate() {
            let marginal = partial_trace(xi, &t.support)?;
            total += self.weight(i) * marginal.expectation(&t.matrix)?;
        }
        Ok(total)
    }

    pub fn norm(&self) -> Result<f64> {
        operator_norm(&self.assemble()?)
    }

    /// Smallest λ_min over the terms.
    pub fn min_term_eigenvalue(&self) -> Result<f64> {
        self.terms.iter().map(|t| min_eigenvalue(&t.matrix)).try_fold(f64::INFINITY, |m, v| Ok(m.min(v?)))
    }

    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        Ok(self.min_term_eigenvalue()? >= -tol)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.matrix = t.matrix.scale_real(factor);
        }
        out
    }
}
