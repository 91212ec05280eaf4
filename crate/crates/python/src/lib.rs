//! Python module `kregret`.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use kregret::analysis::{self, AnalysisConfig, SubsetMode};
use kregret::{data, happiness, selection, skyline};

create_exception!(kregret, KRegretError, PyValueError, "Raised for invalid inputs and failed evaluations.");

fn err(e: kregret::Error) -> PyErr {
    KRegretError::new_err(e.to_string())
}

/// Points with ids and coordinates.
#[pyclass(name = "Dataset", module = "kregret", frozen)]
struct PyDataset {
    inner: kregret::Dataset,
}

#[pymethods]
impl PyDataset {
    /// Builds a dataset from rows of coordinates. Ids default to row indices.
    #[new]
    #[pyo3(signature = (rows, ids=None))]
    fn new(rows: Vec<Vec<f64>>, ids: Option<Vec<usize>>) -> PyResult<Self> {
        let inner = match ids {
            None => kregret::Dataset::from_rows(rows),
            Some(ids) => {
                if ids.len() != rows.len() {
                    return Err(KRegretError::new_err(format!("{} ids for {} rows", ids.len(), rows.len())));
                }
                ids.into_iter()
                    .zip(rows)
                    .map(|(id, r)| kregret::Point::new(id, r))
                    .collect::<kregret::Result<Vec<_>>>()
                    .and_then(kregret::Dataset::new)
            }
        }
        .map_err(err)?;
        Ok(PyDataset { inner })
    }

    #[staticmethod]
    fn from_csv(path: &str) -> PyResult<Self> {
        Ok(PyDataset { inner: data::read_csv(path).map_err(err)? })
    }

    fn to_csv(&self, path: &str) -> PyResult<()> {
        data::write_csv(&self.inner, path).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn ids(&self) -> Vec<usize> {
        self.inner.ids()
    }

    #[getter]
    fn is_normalized(&self) -> bool {
        self.inner.is_normalized()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.points().iter().map(|p| p.coords.clone()).collect()
    }

    fn skyline(&self) -> PyResult<Self> {
        Ok(PyDataset { inner: skyline::compute_skyline(&self.inner).map_err(err)? })
    }

    fn normalize(&self) -> PyResult<Self> {
        Ok(PyDataset { inner: skyline::normalize(&self.inner).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("Dataset(n={}, d={})", self.inner.len(), self.inner.dim())
    }
}

/// A set of utility functions: either finitely many weight vectors or every
/// nonnegative linear function.
#[pyclass(name = "UtilityClass", module = "kregret", frozen)]
struct PyUtilityClass {
    inner: kregret::UtilityClass,
}

#[pymethods]
impl PyUtilityClass {
    #[staticmethod]
    fn full() -> Self {
        PyUtilityClass { inner: kregret::UtilityClass::FullNonnegativeLinear }
    }

    /// `decimals` rounds each utility before ratios are taken.
    #[staticmethod]
    #[pyo3(signature = (vectors, decimals=None))]
    fn finite(vectors: Vec<Vec<f64>>, decimals: Option<u32>) -> PyResult<Self> {
        let vs =
            vectors.into_iter().map(kregret::UtilityVector::new).collect::<kregret::Result<Vec<_>>>().map_err(err)?;
        let class = kregret::FiniteClass::new(vs).map_err(err)?.with_utility_decimals(decimals);
        Ok(PyUtilityClass { inner: kregret::UtilityClass::Finite(class) })
    }

    #[staticmethod]
    fn from_csv(path: &str) -> PyResult<Self> {
        Ok(PyUtilityClass { inner: data::read_utility_class(path).map_err(err)? })
    }

    #[getter]
    fn is_full(&self) -> bool {
        self.inner.is_full()
    }

    fn __repr__(&self) -> String {
        match &self.inner {
            kregret::UtilityClass::FullNonnegativeLinear => "UtilityClass.full()".into(),
            kregret::UtilityClass::Finite(f) => format!("UtilityClass.finite(<{} vectors>)", f.vectors().len()),
        }
    }
}

/// `(step, chosen id, restricted value, marginal gain, candidates evaluated)`
type StepTuple = (usize, usize, Option<f64>, Option<f64>, usize);

/// Outcome of a selection run.
#[pyclass(name = "SelectionResult", module = "kregret", frozen, get_all)]
struct PySelection {
    selected_ids: Vec<usize>,
    min_happiness: f64,
    max_regret: f64,
    lp_count: u64,
    elapsed_ms: f64,
    truncated: bool,
    steps: Vec<StepTuple>,
}

#[pymethods]
impl PySelection {
    fn __repr__(&self) -> String {
        format!("SelectionResult(selected_ids={:?}, min_happiness={:.4})", self.selected_ids, self.min_happiness)
    }
}

impl From<kregret::SelectionResult> for PySelection {
    fn from(r: kregret::SelectionResult) -> Self {
        PySelection {
            steps: r.trace.steps.iter().map(|s| (s.step, s.chosen, s.restricted_value, s.gain, s.evaluated)).collect(),
            lp_count: r.trace.lp_evaluations,
            elapsed_ms: r.trace.elapsed.as_secs_f64() * 1e3,
            selected_ids: r.selected_ids,
            min_happiness: r.min_happiness,
            max_regret: r.max_regret,
            truncated: r.truncated,
        }
    }
}

#[pyclass(name = "AnalysisReport", module = "kregret", frozen, get_all)]
struct PyAnalysis {
    k: usize,
    gamma_g: f64,
    gamma_vacuous: bool,
    alpha_g: f64,
    alpha_vacuous: bool,
    /// `"exhaustive"` or `"sampled"`.
    subset_mode: &'static str,
    subsets_sampled: Option<usize>,
    presgreed_bound: f64,
    stoc_bound: f64,
    greedy_ids: Vec<usize>,
    greedy_value: f64,
    optimal_value: Option<f64>,
    bound_holds: Option<bool>,
}

fn class_or_full(class: Option<&PyUtilityClass>) -> kregret::UtilityClass {
    class.map_or(kregret::UtilityClass::FullNonnegativeLinear, |c| c.inner.clone())
}

#[pyfunction]
#[pyo3(signature = (candidates, k, utilities=None))]
fn pres_greed(
    py: Python<'_>,
    candidates: &PyDataset,
    k: usize,
    utilities: Option<&PyUtilityClass>,
) -> PyResult<PySelection> {
    let class = class_or_full(utilities);
    let c = &candidates.inner;
    Ok(py.detach(|| selection::pres_greed(c, k, &class)).map_err(err)?.into())
}

#[pyfunction]
#[pyo3(signature = (candidates, k, utilities=None, eps=0.1, lambda_=1.1, seed=0))]
fn stoc_pres_greed(
    py: Python<'_>,
    candidates: &PyDataset,
    k: usize,
    utilities: Option<&PyUtilityClass>,
    eps: f64,
    lambda_: f64,
    seed: u64,
) -> PyResult<PySelection> {
    let class = class_or_full(utilities);
    let c = &candidates.inner;
    Ok(py.detach(|| selection::stoc_pres_greed(c, k, &class, eps, lambda_, seed)).map_err(err)?.into())
}

#[pyfunction]
#[pyo3(signature = (candidates, k, utilities=None))]
fn naive_greedy(
    py: Python<'_>,
    candidates: &PyDataset,
    k: usize,
    utilities: Option<&PyUtilityClass>,
) -> PyResult<PySelection> {
    let class = class_or_full(utilities);
    let c = &candidates.inner;
    Ok(py.detach(|| selection::naive_greedy(c, k, &class)).map_err(err)?.into())
}

/// Best size-k subset by enumeration. Refuses when more than `budget` subsets exist.
#[pyfunction]
#[pyo3(signature = (candidates, k, utilities=None, budget=selection::DEFAULT_EXHAUSTIVE_BUDGET))]
fn exhaustive_optimal(
    py: Python<'_>,
    candidates: &PyDataset,
    k: usize,
    utilities: Option<&PyUtilityClass>,
    budget: u128,
) -> PyResult<PySelection> {
    let class = class_or_full(utilities);
    let c = &candidates.inner;
    Ok(py.detach(|| selection::exhaustive_optimal(c, k, &class, budget)).map_err(err)?.into())
}

#[pyfunction]
#[pyo3(signature = (data, ids, utilities=None))]
fn min_happiness(data: &PyDataset, ids: Vec<usize>, utilities: Option<&PyUtilityClass>) -> PyResult<f64> {
    happiness::min_happiness(&data.inner, &ids, &class_or_full(utilities)).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (data, ids, utilities=None))]
fn max_regret_ratio(data: &PyDataset, ids: Vec<usize>, utilities: Option<&PyUtilityClass>) -> PyResult<f64> {
    happiness::max_regret_ratio(&data.inner, &ids, &class_or_full(utilities)).map_err(err)
}

#[pyfunction]
fn sample_size(n: usize, k: usize, eps: f64, lambda_: f64) -> PyResult<usize> {
    selection::sample_size(n, k, eps, lambda_).map_err(err)
}

#[pyfunction]
fn presgreed_bound(alpha: f64, gamma: f64, k: usize) -> PyResult<f64> {
    analysis::presgreed_bound(alpha, gamma, k).map_err(err)
}

#[pyfunction]
fn stoc_bound(eps: f64, lambda_: f64, gamma: f64, k: usize) -> PyResult<f64> {
    analysis::stoc_bound(eps, lambda_, gamma, k).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (candidates, k, utilities=None, subset_budget=analysis::DEFAULT_SUBSET_BUDGET, seed=0, eps=0.1, lambda_=1.1, oracle_budget=Some(1_000_000)))]
#[allow(clippy::too_many_arguments)]
fn analyze(
    py: Python<'_>,
    candidates: &PyDataset,
    k: usize,
    utilities: Option<&PyUtilityClass>,
    subset_budget: usize,
    seed: u64,
    eps: f64,
    lambda_: f64,
    oracle_budget: Option<u128>,
) -> PyResult<PyAnalysis> {
    let class = class_or_full(utilities);
    let cfg = AnalysisConfig { subset_budget, seed, eps, lambda: lambda_, oracle_budget };
    let c = &candidates.inner;
    let r = py.detach(|| analysis::analyze(c, k, &class, &cfg)).map_err(err)?;
    let (subset_mode, subsets_sampled) = match r.subset_mode {
        SubsetMode::Exhaustive => ("exhaustive", None),
        SubsetMode::Sampled { count, .. } => ("sampled", Some(count)),
    };
    Ok(PyAnalysis {
        k: r.k,
        gamma_g: r.gamma_g,
        gamma_vacuous: r.gamma_vacuous,
        alpha_g: r.alpha_g,
        alpha_vacuous: r.alpha_vacuous,
        subset_mode,
        subsets_sampled,
        presgreed_bound: r.presgreed_bound,
        stoc_bound: r.stoc_bound,
        greedy_ids: r.greedy_ids,
        greedy_value: r.greedy_value,
        optimal_value: r.optimal_value,
        bound_holds: r.bound_holds,
    })
}

/// The nine-player example and its four-vector utility class.
#[pyfunction]
fn nba_toy() -> (PyDataset, PyUtilityClass) {
    let (d, c) = data::nba_toy();
    (PyDataset { inner: d }, PyUtilityClass { inner: c })
}

#[pyfunction]
fn nba_2009() -> PyDataset {
    PyDataset { inner: data::nba_2009() }
}

#[pyfunction]
#[pyo3(signature = (n, d, seed=0))]
fn gen_anticorrelated(n: usize, d: usize, seed: u64) -> PyResult<PyDataset> {
    Ok(PyDataset { inner: data::gen_anticorrelated(n, d, seed).map_err(err)? })
}

#[pyfunction]
#[pyo3(signature = (n, d, seed=0))]
fn gen_uniform(n: usize, d: usize, seed: u64) -> PyResult<PyDataset> {
    Ok(PyDataset { inner: data::gen_uniform(n, d, seed).map_err(err)? })
}

#[pymodule(name = "kregret")]
fn kregret_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("KRegretError", m.py().get_type::<KRegretError>())?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyUtilityClass>()?;
    m.add_class::<PySelection>()?;
    m.add_class::<PyAnalysis>()?;
    m.add_function(wrap_pyfunction!(pres_greed, m)?)?;
    m.add_function(wrap_pyfunction!(stoc_pres_greed, m)?)?;
    m.add_function(wrap_pyfunction!(naive_greedy, m)?)?;
    m.add_function(wrap_pyfunction!(exhaustive_optimal, m)?)?;
    m.add_function(wrap_pyfunction!(min_happiness, m)?)?;
    m.add_function(wrap_pyfunction!(max_regret_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(sample_size, m)?)?;
    m.add_function(wrap_pyfunction!(presgreed_bound, m)?)?;
    m.add_function(wrap_pyfunction!(stoc_bound, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(nba_toy, m)?)?;
    m.add_function(wrap_pyfunction!(nba_2009, m)?)?;
    m.add_function(wrap_pyfunction!(gen_anticorrelated, m)?)?;
    m.add_function(wrap_pyfunction!(gen_uniform, m)?)?;
    Ok(())
}
