//! Python bindings: verifiers, Hamiltonians and states as opaque classes, with
//! JSON as the exchange format for everything else.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use qpcp::hamiltonian::{ground_energy, kitaev_verifier, smooth};
use qpcp::linalg::{parse_bits, partial_trace, trace_distance, DensityMatrix};
use qpcp::reduction::{exact_hamiltonian, learn_hamiltonian, learn_hamiltonian_rounded, LocalHamiltonian};
use qpcp::rng::SeedStream;
use qpcp::verifier::{
    accept_probability_exact, repetition_count as rep_count, AnyVerifier, QueryVerifier, Sampler, VerifierSpec,
};
use qpcp::QpcpError;

fn err(e: QpcpError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "State", module = "qpcp_py", frozen)]
pub struct State {
    inner: DensityMatrix,
}

#[pymethods]
impl State {
    #[staticmethod]
    fn basis(num_qubits: usize, index: usize) -> PyResult<Self> {
        if index >= 1usize << num_qubits {
            return Err(PyValueError::new_err(format!("index {index} out of range for {num_qubits} qubits")));
        }
        Ok(Self { inner: DensityMatrix::basis(num_qubits, index) })
    }

    #[staticmethod]
    fn maximally_mixed(num_qubits: usize) -> Self {
        Self { inner: DensityMatrix::maximally_mixed(num_qubits) }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: serde_json::from_str(text).map_err(json_err)? })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("serializable state")
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.inner.num_qubits()
    }

    fn tensor(&self, other: &State) -> Self {
        Self { inner: self.inner.tensor(&other.inner) }
    }

    fn partial_trace(&self, keep: Vec<usize>) -> PyResult<Self> {
        Ok(Self { inner: partial_trace(&self.inner, &keep).map_err(err)? })
    }

    fn trace_distance(&self, other: &State) -> PyResult<f64> {
        trace_distance(&self.inner, &other.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("State(num_qubits={})", self.inner.num_qubits())
    }
}

#[pyclass(name = "Verifier", module = "qpcp_py", frozen)]
pub struct Verifier {
    inner: AnyVerifier,
}

#[pymethods]
impl Verifier {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: VerifierSpec::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&VerifierSpec::from(&self.inner)).expect("serializable spec")
    }

    #[getter]
    fn q(&self) -> usize {
        self.inner.q()
    }

    #[getter]
    fn proof_qubits(&self) -> usize {
        self.inner.registers().proof_qubits()
    }

    #[getter]
    fn adaptive(&self) -> bool {
        self.inner.is_adaptive()
    }

    #[pyo3(signature = (proof, input = ""))]
    fn accept_probability(&self, proof: &State, input: &str) -> PyResult<f64> {
        let x = parse_bits(input).map_err(err)?;
        accept_probability_exact(&self.inner, &x, &proof.inner).map_err(err)
    }

    /// Number of accepting runs out of `shots`.
    #[pyo3(signature = (proof, shots, seed = 0, input = ""))]
    fn sample(&self, proof: &State, shots: usize, seed: u64, input: &str) -> PyResult<usize> {
        let x = parse_bits(input).map_err(err)?;
        let mut rng = SeedStream::new(seed).child_rng("verify");
        Sampler::new(&self.inner, &x, &proof.inner).and_then(|s| s.count_accepts(shots, &mut rng)).map_err(err)
    }

    #[pyo3(signature = (input = ""))]
    fn exact_hamiltonian(&self, input: &str) -> PyResult<Hamiltonian> {
        let x = parse_bits(input).map_err(err)?;
        Ok(Hamiltonian { inner: exact_hamiltonian(&self.inner, &x).map_err(err)? })
    }

    /// Learned Hamiltonian; snapped to an `eta`-bit grid when `eta` is given.
    #[pyo3(signature = (eps = 0.1, delta = 0.1, seed = 0, input = "", eta = None))]
    fn learn_hamiltonian(
        &self,
        eps: f64,
        delta: f64,
        seed: u64,
        input: &str,
        eta: Option<usize>,
    ) -> PyResult<Hamiltonian> {
        let x = parse_bits(input).map_err(err)?;
        let seed = SeedStream::new(seed).child("learn");
        let learned = match eta {
            Some(eta) => learn_hamiltonian_rounded(&self.inner, &x, eta, delta, &seed),
            None => learn_hamiltonian(&self.inner, &x, eps, delta, &seed),
        }
        .map_err(err)?;
        Ok(Hamiltonian { inner: learned.hamiltonian })
    }
}

#[pyclass(name = "Hamiltonian", module = "qpcp_py", frozen)]
pub struct Hamiltonian {
    inner: LocalHamiltonian,
}

#[pymethods]
impl Hamiltonian {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: LocalHamiltonian::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.inner.num_qubits
    }

    #[getter]
    fn num_terms(&self) -> usize {
        self.inner.num_terms()
    }

    fn energy(&self, state: &State) -> PyResult<f64> {
        self.inner.energy(&state.inner).map_err(err)
    }

    fn ground_energy(&self) -> PyResult<f64> {
        ground_energy(&self.inner).map_err(err)
    }

    fn norm(&self) -> PyResult<f64> {
        self.inner.norm().map_err(err)
    }

    /// Smoothed Hamiltonian and its scale factor.
    fn smooth(&self) -> PyResult<(Hamiltonian, f64)> {
        let s = smooth(&self.inner).map_err(err)?;
        Ok((Hamiltonian { inner: s.hamiltonian }, s.scale))
    }

    fn kitaev_verifier(&self) -> PyResult<Verifier> {
        Ok(Verifier { inner: kitaev_verifier(&self.inner).map_err(err)?.into() })
    }
}

#[pyfunction]
#[pyo3(signature = (c, s, t = 1.0))]
fn repetition_count(c: f64, s: f64, t: f64) -> PyResult<usize> {
    rep_count(c, s, t).map_err(err)
}

/// (pass, detail JSON) for one acceptance experiment.
#[pyfunction]
#[pyo3(signature = (criterion, seed = 0))]
fn run_criterion(py: Python<'_>, criterion: u8, seed: u64) -> PyResult<(bool, String)> {
    let outcome = py.detach(|| qpcp::repro::run(criterion, seed)).map_err(err)?;
    Ok((outcome.pass, serde_json::to_string(&outcome.detail).map_err(json_err)?))
}

#[pymodule]
fn qpcp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<State>()?;
    m.add_class::<Verifier>()?;
    m.add_class::<Hamiltonian>()?;
    m.add_function(wrap_pyfunction!(repetition_count, m)?)?;
    m.add_function(wrap_pyfunction!(run_criterion, m)?)?;
    Ok(())
}
