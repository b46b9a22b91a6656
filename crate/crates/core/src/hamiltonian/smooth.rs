use serde::Serialize;

use crate::error::{QpcpError, Result};
use crate::linalg::{embed_operator, min_eigenvalue, operator_norm, ComplexMatrix};
use crate::reduction::{LocalHamiltonian, Term, TERM_TOL};

/// Output of [`smooth`]: H′ = (1/m) Σ H′ᵢ with 0 ⪯ H′ᵢ ⪯ I and H′ = H / 2^{q+3}.
#[derive(Clone, Debug, Serialize)]
pub struct Smoothed {
    pub hamiltonian: LocalHamiltonian,
    /// 2^{q+3}.
    pub scale: f64,
    /// (term index, pieces moved out of it).
    pub redistributions: Vec<(usize, usize)>,
    /// Number of low-norm terms available to receive pieces.
    pub low_terms: usize,
}

/// t = ⌊2mα − 1⌋ pieces of norm 1/(2m) split off a term of norm α.
pub fn redistribution_count(m: usize, alpha: f64) -> usize {
    (2.0 * m as f64 * alpha - 1.0).floor().max(0.0) as usize
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

fn lift(m: &ComplexMatrix, support: &[usize], target: &[usize]) -> Result<ComplexMatrix> {
    let positions: Vec<usize> = support.iter().map(|q| target.iter().position(|t| t == q).expect("subset")).collect();
    embed_operator(m, &positions, target.len())
}

/// Rescales by 2^{q+3} and moves norm from heavy terms into light ones so that
/// every term of the result has norm at most 1/m before the ×m rescale.
pub fn smooth(h: &LocalHamiltonian) -> Result<Smoothed> {
    let m = h.num_terms();
    if m == 0 {
        return Err(QpcpError::Precondition("hamiltonian has no terms".into()));
    }
    let lam = h.min_term_eigenvalue()?;
    if lam < -TERM_TOL {
        return Err(QpcpError::Precondition(format!("a term has eigenvalue {lam:.3e} < 0")));
    }
    let norm = h.norm()?;
    if norm > 1.0 + TERM_TOL {
        return Err(QpcpError::Precondition(format!("‖H‖ = {norm} exceeds 1")));
    }
    let q = h.locality;
    let scale = 2f64.powi(q as i32 + 3);
    let mf = m as f64;
    let hat: Vec<ComplexMatrix> =
        h.terms.iter().enumerate().map(|(i, t)| t.matrix.scale_real(h.weight(i) / scale)).collect();
    let alpha: Vec<f64> = hat.iter().map(operator_norm).collect::<Result<_>>()?;

    let low: Vec<usize> = (0..m).filter(|&i| alpha[i] <= 1.0 / (2.0 * mf)).collect();
    let mut high: Vec<usize> = (0..m).filter(|&i| alpha[i] > 1.0 / (2.0 * mf)).collect();
    high.sort_by(|&a, &b| alpha[b].total_cmp(&alpha[a]).then(a.cmp(&b)));

    let mut q_terms: Vec<Term> =
        h.terms.iter().zip(&hat).map(|(t, m)| Term { support: t.support.clone(), matrix: m.clone() }).collect();
    let mut free = low.iter().copied();
    let mut redistributions = Vec::new();
    let mut used = 0;
    for &j in &high {
        if alpha[j] <= 1.0 / mf {
            continue;
        }
        let t = redistribution_count(m, alpha[j]);
        used += t;
        if used > low.len() {
            return Err(QpcpError::Precondition(format!(
                "redistribution needs {used} light terms but only {} exist",
                low.len()
            )));
        }
        let piece = hat[j].scale_real(1.0 / (2.0 * mf * alpha[j]));
        for i in free.by_ref().take(t) {
            let support = union(&q_terms[i].support, &h.terms[j].support);
            let a = lift(&q_terms[i].matrix, &q_terms[i].support, &support)?;
            let b = lift(&piece, &h.terms[j].support, &support)?;
            q_terms[i] = Term { support, matrix: &a + &b };
        }
        q_terms[j].matrix = hat[j].scale_real(1.0 - t as f64 / (2.0 * mf * alpha[j]));
        redistributions.push((j, t));
    }
    let terms: Vec<Term> =
        q_terms.into_iter().map(|t| Term { support: t.support, matrix: t.matrix.scale_real(mf) }).collect();
    for t in &terms {
        let lo = min_eigenvalue(&t.matrix)?;
        if lo < -1e-10 {
            return Err(QpcpError::Structural(format!("smoothed term has eigenvalue {lo:.3e}")));
        }
    }
    let locality = terms.iter().map(|t| t.support.len()).max().unwrap_or(0).max(q);
    let hamiltonian = LocalHamiltonian::new(h.num_qubits, locality, terms, Some(vec![1.0 / mf; m]))?;
    Ok(Smoothed { hamiltonian, scale, redistributions, low_terms: low.len() })
}
