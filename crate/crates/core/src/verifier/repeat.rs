use rand::Rng;

use super::{accept_probability_exact, path_distribution, QueryPath, QueryVerifier, Sampler};
use crate::error::{QpcpError, Result};
use crate::linalg::DensityMatrix;

/// R independent copies of a verifier, each reading its own proof copy.
/// Accepts when at least `threshold · R` copies accept.
#[derive(Clone, Debug)]
pub struct RepeatedVerifier<V> {
    pub base: V,
    pub repetitions: usize,
    pub threshold: f64,
}

pub fn parallel_repeat<V: QueryVerifier>(base: V, repetitions: usize, threshold: f64) -> Result<RepeatedVerifier<V>> {
    if repetitions == 0 {
        return Err(QpcpError::InvalidParameter("R must be at least 1".into()));
    }
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(QpcpError::InvalidParameter(format!("threshold {threshold} outside (0, 1]")));
    }
    Ok(RepeatedVerifier { base, repetitions, threshold })
}

/// R = ⌈2 t ln 2 / (c − s)²⌉.
pub fn repetition_count(c: f64, s: f64, t: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&s) || !(0.0..=1.0).contains(&c) || c <= s {
        return Err(QpcpError::InvalidParameter(format!("need 0 <= s < c <= 1, got c = {c}, s = {s}")));
    }
    if t <= 0.0 {
        return Err(QpcpError::InvalidParameter(format!("t = {t} must be positive")));
    }
    Ok((2.0 * t * std::f64::consts::LN_2 / ((c - s) * (c - s))).ceil() as usize)
}

/// Pr[at least `k` successes] for independent Bernoulli trials.
pub fn at_least(probs: &[f64], k: usize) -> f64 {
    let mut dist = vec![1.0];
    for &p in probs {
        let mut next = vec![0.0; dist.len() + 1];
        for (j, &d) in dist.iter().enumerate() {
            next[j] += d * (1.0 - p);
            next[j + 1] += d * p;
        }
        dist = next;
    }
    dist.iter().skip(k).sum::<f64>().clamp(0.0, 1.0)
}

impl<V: QueryVerifier> RepeatedVerifier<V> {
    pub fn query_count(&self) -> usize {
        self.base.q() * self.repetitions
    }

    /// Smallest accept count meeting the threshold.
    pub fn required_accepts(&self) -> usize {
        let raw = self.threshold * self.repetitions as f64;
        (raw - 1e-12).ceil().max(0.0) as usize
    }

    fn expand<'a>(&self, proofs: &'a [DensityMatrix]) -> Result<Vec<&'a DensityMatrix>> {
        match proofs.len() {
            1 => Ok(vec![&proofs[0]; self.repetitions]),
            r if r == self.repetitions => Ok(proofs.iter().collect()),
            r => Err(QpcpError::DimensionMismatch(format!("{r} proof copies for {} repetitions", self.repetitions))),
        }
    }

    /// Exact acceptance on the product proof ⊗ proofs; a single proof is repeated R times.
    pub fn accept_probability_exact(&self, x: &[bool], proofs: &[DensityMatrix]) -> Result<f64> {
        let per_copy = if proofs.len() == 1 {
            vec![accept_probability_exact(&self.base, x, &proofs[0])?; self.repetitions]
        } else {
            self.expand(proofs)?
                .into_iter()
                .map(|xi| accept_probability_exact(&self.base, x, xi))
                .collect::<Result<Vec<_>>>()?
        };
        Ok(at_least(&per_copy, self.required_accepts()))
    }

    /// Per-copy path distributions; the composite distribution is their product.
    pub fn path_distributions(&self, x: &[bool], proofs: &[DensityMatrix]) -> Result<Vec<Vec<QueryPath>>> {
        self.expand(proofs)?.into_iter().map(|xi| path_distribution(&self.base, x, xi)).collect()
    }

    pub fn sample_run<R: Rng + ?Sized>(
        &self,
        x: &[bool],
        proofs: &[DensityMatrix],
        rng: &mut R,
    ) -> Result<(Vec<QueryPath>, bool)> {
        let copies = self.expand(proofs)?;
        let shared = if proofs.len() == 1 { Some(Sampler::new(&self.base, x, &proofs[0])?) } else { None };
        let mut paths = Vec::with_capacity(self.repetitions);
        let mut accepts = 0;
        for xi in copies {
            let (path, ok) = match &shared {
                Some(s) => s.run(rng)?,
                None => Sampler::new(&self.base, x, xi)?.run(rng)?,
            };
            accepts += ok as usize;
            paths.push(path);
        }
        Ok((paths, accepts >= self.required_accepts()))
    }
}
