//! Python bindings: ensembles, POVMs, protocols, mutual information, and the
//! derivative-free optimizer, exposed as the `double_trine_py` module.

use double_trine::adaptive::{self, both_qubits_trine_protocol, run_protocol, ProtocolNode};
use double_trine::ensembles::{double_trine, trine_ensemble, Ensemble};
use double_trine::linalg::{Complex, StateVector};
use double_trine::measurements::{
    classify_povm, concurrence, entangled_basis_povm, nine_outcome_product_povm,
    single_qubit_trine_povm, six_outcome_povm, six_outcome_unentangled_povm, Povm,
};
use double_trine::optimizer::{maximize_mi, Mode, PovmParameterization};
use double_trine::serial;
use double_trine::statistics::{
    mutual_information, optimum_mi_closed_form, outcome_probabilities,
};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A pure-state ensemble with prior probabilities.
#[pyclass(name = "Ensemble", frozen)]
struct PyEnsemble {
    inner: Ensemble,
}

#[pymethods]
impl PyEnsemble {
    /// The three trine pairs ψ_j ⊗ ψ_j with equal priors.
    #[staticmethod]
    fn double_trine() -> Self {
        PyEnsemble {
            inner: double_trine(),
        }
    }

    /// The single-qubit trine with equal priors.
    #[staticmethod]
    fn trine() -> Self {
        PyEnsemble {
            inner: trine_ensemble(),
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyEnsemble {
            inner: serial::ensemble_from_json(text).map_err(value_error)?,
        })
    }

    fn to_json(&self) -> String {
        serial::ensemble_to_json(&self.inner)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// State amplitudes as a list of complex lists.
    fn states(&self) -> Vec<Vec<Complex>> {
        self.inner
            .states()
            .iter()
            .map(|s| s.amplitudes().to_vec())
            .collect()
    }

    fn priors(&self) -> Vec<f64> {
        self.inner.priors().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "Ensemble(dim={}, states={})",
            self.inner.dim(),
            self.inner.len()
        )
    }
}

/// A positive operator-valued measure on dimension 2 or 4.
#[pyclass(name = "Povm", frozen)]
struct PyPovm {
    inner: Povm,
}

#[pymethods]
impl PyPovm {
    /// The optimal entangled orthonormal-basis measurement.
    #[staticmethod]
    fn entangled_basis() -> Self {
        PyPovm {
            inner: entangled_basis_povm(),
        }
    }

    /// The six-outcome unentangled POVM achieving the same information.
    #[staticmethod]
    fn six_outcome() -> Self {
        PyPovm {
            inner: six_outcome_povm(),
        }
    }

    /// The nine-outcome product of single-qubit trine POVMs.
    #[staticmethod]
    fn nine_outcome_product() -> Self {
        PyPovm {
            inner: nine_outcome_product_povm(),
        }
    }

    /// The single-qubit trine POVM.
    #[staticmethod]
    fn single_qubit_trine() -> Self {
        PyPovm {
            inner: single_qubit_trine_povm(),
        }
    }

    /// The six-outcome family at arbitrary (theta, alpha); raises ValueError
    /// when the elements do not form a POVM.
    #[staticmethod]
    fn six_outcome_family(theta: f64, alpha: f64) -> PyResult<Self> {
        Ok(PyPovm {
            inner: six_outcome_unentangled_povm(theta, alpha).map_err(value_error)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyPovm {
            inner: serial::povm_from_json(text).map_err(value_error)?,
        })
    }

    fn to_json(&self) -> String {
        serial::povm_to_json(&self.inner)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    /// Elements as row-major complex matrices.
    fn elements(&self) -> Vec<Vec<Vec<Complex>>> {
        self.inner
            .elements()
            .iter()
            .map(|op| {
                (0..op.dim())
                    .map(|i| (0..op.dim()).map(|j| op.get(i, j)).collect())
                    .collect()
            })
            .collect()
    }

    /// "unentangled", "entangled", or "indeterminate".
    fn classification(&self) -> PyResult<String> {
        Ok(classify_povm(&self.inner).map_err(value_error)?.to_string())
    }

    fn __repr__(&self) -> String {
        format!("Povm(dim={}, outcomes={})", self.inner.dim(), self.inner.len())
    }
}

/// An adaptive local-measurement protocol tree.
#[pyclass(name = "Protocol", frozen)]
struct PyProtocol {
    inner: ProtocolNode,
}

#[pymethods]
impl PyProtocol {
    /// Trine POVM on the first qubit, then on the second.
    #[staticmethod]
    fn trine_both() -> Self {
        PyProtocol {
            inner: both_qubits_trine_protocol(),
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyProtocol {
            inner: serial::protocol_from_json(text).map_err(value_error)?,
        })
    }

    fn to_json(&self) -> String {
        serial::protocol_to_json(&self.inner)
    }

    /// Exact joint distribution and mutual information against an ensemble;
    /// returns (joint rows, outcome labels, mi_bits).
    fn run(&self, ensemble: &PyEnsemble) -> PyResult<(Vec<Vec<f64>>, Vec<String>, f64)> {
        let jd = run_protocol(&ensemble.inner, &self.inner).map_err(value_error)?;
        Ok((
            jd.joint().to_vec(),
            jd.labels().to_vec(),
            mutual_information(&jd),
        ))
    }
}

/// Mutual information in bits between ensemble index and measurement outcome.
#[pyfunction]
fn mutual_information_bits(ensemble: &PyEnsemble, povm: &PyPovm) -> PyResult<f64> {
    let jd = outcome_probabilities(&ensemble.inner, &povm.inner).map_err(value_error)?;
    Ok(mutual_information(&jd))
}

/// Conditional outcome probabilities p(k|j), one row per state.
#[pyfunction]
fn conditional_probabilities(ensemble: &PyEnsemble, povm: &PyPovm) -> PyResult<Vec<Vec<f64>>> {
    let jd = outcome_probabilities(&ensemble.inner, &povm.inner).map_err(value_error)?;
    Ok((0..jd.num_states()).map(|j| jd.conditionals(j)).collect())
}

/// Closed form of the optimum: log2(3) + p log2(p) + 2q log2(q).
#[pyfunction]
fn optimum_mi() -> f64 {
    optimum_mi_closed_form()
}

/// Concurrence of a two-qubit pure state given as four amplitudes.
#[pyfunction]
#[pyo3(name = "concurrence")]
fn concurrence_py(amplitudes: Vec<Complex>) -> PyResult<f64> {
    concurrence(&StateVector::new(amplitudes)).map_err(value_error)
}

/// Derivative-free search for the POVM maximizing mutual information.
/// `mode` is "global" or "product"; returns (mi_bits, povm, classification).
#[pyfunction]
#[pyo3(signature = (ensemble, mode, outcomes, restarts=20, iters=2000, seed=1))]
fn optimize_povm(
    ensemble: &PyEnsemble,
    mode: &str,
    outcomes: usize,
    restarts: usize,
    iters: usize,
    seed: u64,
) -> PyResult<(f64, PyPovm, String)> {
    let mode = match mode {
        "global" => Mode::Global,
        "product" => Mode::Product,
        other => {
            return Err(value_error(format!(
                "unknown mode `{other}` (expected `global` or `product`)"
            )))
        }
    };
    let result = maximize_mi(
        &ensemble.inner,
        PovmParameterization { mode, outcomes },
        restarts,
        iters,
        seed,
    )
    .map_err(value_error)?;
    let classification = result.classification.to_string();
    Ok((
        result.mi_bits,
        PyPovm { inner: result.povm },
        classification,
    ))
}

/// Search over one-way adaptive protocols; returns (protocol, mi_bits).
#[pyfunction]
#[pyo3(signature = (ensemble, outcomes_first=3, outcomes_second=3, budget=400, seed=1))]
fn optimize_one_way(
    ensemble: &PyEnsemble,
    outcomes_first: usize,
    outcomes_second: usize,
    budget: usize,
    seed: u64,
) -> PyResult<(PyProtocol, f64)> {
    let (protocol, mi) = adaptive::optimize_one_way(
        &ensemble.inner,
        outcomes_first,
        outcomes_second,
        budget,
        seed,
    )
    .map_err(value_error)?;
    Ok((PyProtocol { inner: protocol }, mi))
}

#[pymodule]
fn double_trine_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEnsemble>()?;
    m.add_class::<PyPovm>()?;
    m.add_class::<PyProtocol>()?;
    m.add_function(wrap_pyfunction!(mutual_information_bits, m)?)?;
    m.add_function(wrap_pyfunction!(conditional_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(optimum_mi, m)?)?;
    m.add_function(wrap_pyfunction!(concurrence_py, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_povm, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_one_way, m)?)?;
    Ok(())
}
