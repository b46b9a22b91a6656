use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{QpcpError, Result};

use super::eigen::{hermitian_eigen, hermitian_eigenvalues, trace_norm};
use super::matrix::{kron, ComplexMatrix, C64};

pub const STATE_TOL: f64 = 1e-10;

/// Bit offset of `qubit` in a basis index over `n` qubits; qubit 0 is the most significant bit.
#[inline]
pub fn qubit_shift(qubit: usize, n: usize) -> usize {
    n - 1 - qubit
}

/// Scatters the bits of `value` (most significant first) onto `positions` of an `n`-qubit index.
pub fn deposit(value: usize, positions: &[usize], n: usize) -> usize {
    let w = positions.len();
    positions.iter().enumerate().fold(0, |acc, (r, &q)| acc | (((value >> (w - 1 - r)) & 1) << qubit_shift(q, n)))
}

/// Gathers the bits of `index` at `positions` into a value, most significant first.
pub fn extract(index: usize, positions: &[usize], n: usize) -> usize {
    positions.iter().fold(0, |acc, &q| (acc << 1) | ((index >> qubit_shift(q, n)) & 1))
}

pub fn check_qubits(qubits: &[usize], n: usize) -> Result<()> {
    for (i, &q) in qubits.iter().enumerate() {
        if q >= n {
            return Err(QpcpError::IndexOutOfRange { index: q, num_qubits: n });
        }
        if qubits[..i].contains(&q) {
            return Err(QpcpError::InvalidParameter(format!("qubit {q} listed twice")));
        }
    }
    Ok(())
}

/// Lifts `op`, acting on `support` (its r-th tensor factor is qubit `support[r]`), to `n` qubits.
pub fn embed_operator(op: &ComplexMatrix, support: &[usize], n: usize) -> Result<ComplexMatrix> {
    check_qubits(support, n)?;
    let local = 1usize << support.len();
    if op.rows() != local || op.cols() != local {
        return Err(QpcpError::DimensionMismatch(format!(
            "operator of size {} on {} qubits",
            op.rows(),
            support.len()
        )));
    }
    let rest: Vec<usize> = (0..n).filter(|q| !support.contains(q)).collect();
    let offsets: Vec<usize> = (0..local).map(|r| deposit(r, support, n)).collect();
    let mut full = ComplexMatrix::zeros(1 << n, 1 << n);
    for t in 0..1usize << rest.len() {
        let base = deposit(t, &rest, n);
        for r in 0..local {
            for c in 0..local {
                let v = op.get(r, c);
                if v.re != 0.0 || v.im != 0.0 {
                    full.set(base | offsets[r], base | offsets[c], v);
                }
            }
        }
    }
    Ok(full)
}

/// Partial trace of an `n`-qubit operator keeping `keep` in the given order.
pub fn partial_trace_matrix(m: &ComplexMatrix, n: usize, keep: &[usize]) -> Result<ComplexMatrix> {
    check_qubits(keep, n)?;
    if m.rows() != 1 << n || m.cols() != 1 << n {
        return Err(QpcpError::DimensionMismatch(format!("matrix of size {} for {n} qubits", m.rows())));
    }
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let kept: Vec<usize> = (0..1usize << keep.len()).map(|r| deposit(r, keep, n)).collect();
    let bases: Vec<usize> = (0..1usize << traced.len()).map(|t| deposit(t, &traced, n)).collect();
    let dim = kept.len();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            let s: C64 = bases.iter().map(|&b| m.get(b | kept[r], b | kept[c])).sum();
            out.set(r, c, s);
        }
    }
    Ok(out)
}

/// Normalized pure state on `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let num_qubits = log2_exact(amplitudes.len())?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(QpcpError::InvalidState(format!("squared norm {norm}")));
        }
        Ok(Self { num_qubits, amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let num_qubits = log2_exact(amplitudes.len())?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QpcpError::InvalidState("zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { num_qubits, amplitudes })
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { num_qubits, amplitudes }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix { num_qubits: self.num_qubits, matrix: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes) }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut amplitudes = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        Self { num_qubits: self.num_qubits + other.num_qubits, amplitudes }
    }
}

fn log2_exact(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(QpcpError::DimensionMismatch(format!("length {len} is not a power of two")));
    }
    Ok(len.trailing_zeros() as usize)
}

/// Density operator on `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(QpcpError::NonSquare { rows: matrix.rows(), cols: matrix.cols() });
        }
        let num_qubits = log2_exact(matrix.rows())?;
        let deviation = matrix.hermiticity_error();
        if deviation > STATE_TOL {
            return Err(QpcpError::InvalidState(format!("not Hermitian (deviation {deviation:.3e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(QpcpError::InvalidState(format!("trace {tr}")));
        }
        let lo = hermitian_eigenvalues(&matrix)?[0];
        if lo < -STATE_TOL {
            return Err(QpcpError::InvalidState(format!("negative eigenvalue {lo:.3e}")));
        }
        Ok(Self { num_qubits, matrix })
    }

    /// Wraps a matrix already known to be a state (internal pipelines whose outputs are states by construction).
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        let num_qubits = matrix.rows().trailing_zeros() as usize;
        Self { num_qubits, matrix }
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let d = 1 << num_qubits;
        Self { num_qubits, matrix: ComplexMatrix::identity(d).scale_real(1.0 / d as f64) }
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        StateVector::basis(num_qubits, index).to_density()
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self { num_qubits: self.num_qubits + other.num_qubits, matrix: kron(&self.matrix, &other.matrix) }
    }

    /// Re tr[op ρ].
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<f64> {
        if op.rows() != self.dim() || op.cols() != self.dim() {
            return Err(QpcpError::DimensionMismatch(format!(
                "operator of size {} against state of dimension {}",
                op.rows(),
                self.dim()
            )));
        }
        let d = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..d {
            for c in 0..d {
                acc += op.get(r, c) * self.matrix.get(c, r);
            }
        }
        Ok(acc.re)
    }

    /// Mixture λρ + (1−λ)σ.
    pub fn mix(&self, other: &Self, lambda: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(QpcpError::DimensionMismatch("mixing states of different size".into()));
        }
        Ok(Self {
            num_qubits: self.num_qubits,
            matrix: &self.matrix.scale_real(lambda) + &other.matrix.scale_real(1.0 - lambda),
        })
    }

    /// Eigen-ensemble {(p_k, |ψ_k⟩)} with p_k above `cutoff`.
    pub fn ensemble(&self, cutoff: f64) -> Result<Vec<(f64, Vec<C64>)>> {
        let eig = hermitian_eigen(&self.matrix)?;
        Ok((0..eig.values.len())
            .rev()
            .filter(|&j| eig.values[j] > cutoff)
            .map(|j| (eig.values[j], eig.vector(j)))
            .collect())
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.matrix.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        DensityMatrix::new(ComplexMatrix::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let m = partial_trace_matrix(&rho.matrix, rho.num_qubits, keep)?;
    Ok(DensityMatrix { num_qubits: keep.len(), matrix: m })
}

/// ½‖ρ − σ‖₁.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(QpcpError::DimensionMismatch(format!("states of dimension {} and {}", rho.dim(), sigma.dim())));
    }
    Ok(0.5 * trace_norm(&(&rho.matrix - &sigma.matrix))?)
}

/// Clips negative eigenvalues of a Hermitian matrix and renormalizes to unit trace.
pub fn project_to_state(m: &ComplexMatrix) -> Result<DensityMatrix> {
    let eig = hermitian_eigen(m)?;
    let d = m.rows();
    let mut out = ComplexMatrix::zeros(d, d);
    let mut total = 0.0;
    for (j, &v) in eig.values.iter().enumerate() {
        if v > 0.0 {
            let u = eig.vector(j);
            out = &out + &ComplexMatrix::outer(&u, &u).scale_real(v);
            total += v;
        }
    }
    if total <= 0.0 {
        return Err(QpcpError::InvalidState("no positive spectrum to project".into()));
    }
    Ok(DensityMatrix::from_trusted(out.scale_real(1.0 / total).hermitian_part()))
}
