// SPDX-License-Identifier: Apache-2.0

//! Python bindings. Rate snapshots cross the boundary as
//! `{(src, dst): rate}` dictionaries.

use std::collections::BTreeMap;
use std::path::PathBuf;

use diffpath::evaluation;
use diffpath::inference;
use diffpath::io;
use diffpath::model;
use diffpath::synth;
use diffpath::{Edge, Error, Family, NodeId, RateSnapshot};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

type Rates = BTreeMap<(NodeId, NodeId), f64>;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn snapshot(rates: Rates) -> PyResult<RateSnapshot> {
    RateSnapshot::from_rates(0, 0.0, rates).map_err(py_err)
}

fn rates(s: &RateSnapshot) -> Rates {
    s.iter().collect()
}

#[pyclass(name = "TransmissionModel", module = "diffpath_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyModel(diffpath::TransmissionModel);

#[pymethods]
impl PyModel {
    /// `family` is one of "exp", "pow", "ray"; "pow" needs `delta`.
    #[new]
    #[pyo3(signature = (family, delta=None))]
    fn new(family: &str, delta: Option<f64>) -> PyResult<Self> {
        let family = match family {
            "exp" => Family::Exp,
            "pow" => Family::Pow,
            "ray" => Family::Ray,
            other => return Err(PyValueError::new_err(format!("unknown model family '{other}'"))),
        };
        Ok(Self(diffpath::TransmissionModel::new(family, delta).map_err(py_err)?))
    }

    #[getter]
    fn family(&self) -> &'static str {
        match self.0.family {
            Family::Exp => "exp",
            Family::Pow => "pow",
            Family::Ray => "ray",
        }
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta
    }

    fn log_survival(&self, t_src: f64, t_dst: f64, alpha: f64) -> PyResult<f64> {
        self.0.log_survival(t_src, t_dst, alpha).map_err(py_err)
    }

    fn hazard(&self, t_src: f64, t_dst: f64, alpha: f64) -> PyResult<f64> {
        self.0.hazard(t_src, t_dst, alpha).map_err(py_err)
    }

    fn density(&self, t_src: f64, t_dst: f64, alpha: f64) -> f64 {
        self.0.transmission_density(t_src, t_dst, alpha)
    }

    fn mean_delay(&self, alpha: f64) -> Option<f64> {
        synth::mean_delay(&self.0, alpha)
    }

    fn __repr__(&self) -> String {
        format!("TransmissionModel('{}', delta={})", self.family(), self.0.delta)
    }
}

#[pyclass(name = "Cascade", module = "diffpath_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCascade(diffpath::Cascade);

#[pymethods]
impl PyCascade {
    #[new]
    fn new(id: String, start_time: f64, window: f64, events: Vec<(NodeId, f64)>) -> PyResult<Self> {
        let events = events.into_iter().map(|(node, time)| diffpath::Event { node, time }).collect();
        Ok(Self(diffpath::Cascade::new(id, start_time, window, events).map_err(py_err)?))
    }

    #[getter]
    fn id(&self) -> String {
        self.0.id.clone()
    }

    #[getter]
    fn start_time(&self) -> f64 {
        self.0.start_time
    }

    #[getter]
    fn window(&self) -> f64 {
        self.0.window
    }

    #[getter]
    fn events(&self) -> Vec<(NodeId, f64)> {
        self.0.events().iter().map(|e| (e.node, e.time)).collect()
    }

    fn horizon(&self) -> f64 {
        self.0.horizon()
    }

    fn infection_time(&self, node: NodeId) -> Option<f64> {
        self.0.infection_time(node)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Cascade('{}', start={}, window={}, events={})",
            self.0.id,
            self.0.start_time,
            self.0.window,
            self.0.len()
        )
    }
}

#[pyclass(name = "GroundTruth", module = "diffpath_py", frozen)]
struct PyGroundTruth(synth::GroundTruthNetwork);

#[pymethods]
impl PyGroundTruth {
    #[getter]
    fn nodes(&self) -> usize {
        self.0.nodes()
    }

    /// `(src, dst, kind, peak, onset, period, duration)` per edge.
    fn edges(&self) -> Vec<(NodeId, NodeId, String, f64, f64, f64, f64)> {
        self.0
            .edges()
            .iter()
            .map(|(s, d, p)| (*s, *d, p.kind.to_string(), p.peak, p.onset, p.period, p.duration))
            .collect()
    }

    fn rates_at(&self, t: f64) -> Rates {
        rates(&self.0.rates_at(0, t))
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        io::write_ground_truth(&path, &self.0).map_err(py_err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self(io::read_ground_truth(&path).map_err(py_err)?))
    }
}

#[pyclass(name = "InferenceConfig", module = "diffpath_py", skip_from_py_object)]
#[derive(Clone)]
struct PyConfig {
    #[pyo3(get, set)]
    model: PyModel,
    #[pyo3(get, set)]
    epsilon: f64,
    #[pyo3(get, set)]
    rho: f64,
    #[pyo3(get, set)]
    gamma0: f64,
    /// "const" or "invsqrt".
    #[pyo3(get, set)]
    schedule: String,
    #[pyo3(get, set)]
    iterations: Option<usize>,
    #[pyo3(get, set)]
    sample_window: f64,
    /// "uniform" or "exp".
    #[pyo3(get, set)]
    sampling: String,
    #[pyo3(get, set)]
    tau: Option<f64>,
    #[pyo3(get, set)]
    time_resolution: f64,
    #[pyo3(get, set)]
    init_rate: f64,
    #[pyo3(get, set)]
    seed: u64,
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (
        model=None, epsilon=1e-6, rho=0.95, gamma0=0.1, schedule="const".to_string(), iterations=None,
        sample_window=10.0, sampling="uniform".to_string(), tau=None, time_resolution=1.0, init_rate=1e-2, seed=0
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        model: Option<PyRef<'_, PyModel>>,
        epsilon: f64,
        rho: f64,
        gamma0: f64,
        schedule: String,
        iterations: Option<usize>,
        sample_window: f64,
        sampling: String,
        tau: Option<f64>,
        time_resolution: f64,
        init_rate: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let config = Self {
            model: model.map_or(PyModel(diffpath::TransmissionModel::exponential()), |m| m.clone()),
            epsilon,
            rho,
            gamma0,
            schedule,
            iterations,
            sample_window,
            sampling,
            tau,
            time_resolution,
            init_rate,
            seed,
        };
        config.resolve()?;
        Ok(config)
    }
}

impl PyConfig {
    fn resolve(&self) -> PyResult<diffpath::InferenceConfig> {
        let schedule = match self.schedule.as_str() {
            "const" => diffpath::StepSchedule::Constant,
            "invsqrt" => diffpath::StepSchedule::InvSqrt,
            other => return Err(PyValueError::new_err(format!("unknown schedule '{other}'"))),
        };
        let sampling = match self.sampling.as_str() {
            "uniform" => diffpath::Sampling::Uniform,
            "exp" => diffpath::Sampling::Exponential { tau: self.tau },
            other => return Err(PyValueError::new_err(format!("unknown sampling '{other}'"))),
        };
        let config = diffpath::InferenceConfig {
            model: self.model.0,
            epsilon: self.epsilon,
            rho: self.rho,
            gamma0: self.gamma0,
            schedule,
            iterations: self.iterations,
            sample_window: self.sample_window,
            sampling,
            time_resolution: self.time_resolution,
            init_rate: self.init_rate,
            seed: self.seed,
        };
        config.validate().map_err(py_err)?;
        Ok(config)
    }
}

fn store(cascades: &[PyRef<'_, PyCascade>]) -> diffpath::CascadeStore {
    diffpath::CascadeStore::new(cascades.iter().map(|c| c.0.clone()).collect())
}

fn config_or_default(config: Option<PyRef<'_, PyConfig>>) -> PyResult<diffpath::InferenceConfig> {
    match config {
        Some(c) => c.resolve(),
        None => Ok(diffpath::InferenceConfig::default()),
    }
}

#[pyfunction]
fn cascade_neg_log_likelihood(cascade: PyRef<'_, PyCascade>, rates: Rates, model: PyRef<'_, PyModel>) -> PyResult<f64> {
    model::cascade_neg_log_likelihood(&cascade.0, &snapshot(rates)?, &model.0).map_err(py_err)
}

#[pyfunction]
fn cascade_gradient(cascade: PyRef<'_, PyCascade>, rates: Rates, model: PyRef<'_, PyModel>) -> PyResult<Rates> {
    model::cascade_gradient(&cascade.0, &snapshot(rates)?, &model.0).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (seed_matrix, iterations, edges, rng_seed=0))]
fn generate_kronecker(seed_matrix: [[f64; 2]; 2], iterations: u32, edges: usize, rng_seed: u64) -> PyResult<Vec<Edge>> {
    let spec = diffpath::KroneckerSpec { seed: seed_matrix, iterations, target_edges: edges };
    synth::generate_kronecker(&spec, rng_seed).map_err(py_err)
}

/// Assigns evolution patterns to `edges`; `kinds` defaults to all five.
#[pyfunction]
#[pyo3(signature = (
    nodes, edges, peak=(0.5, 2.0), horizon=200.0, duration=(20.0, 60.0), period=(20.0, 50.0), kinds=None, rng_seed=0
))]
#[allow(clippy::too_many_arguments)]
fn assign_patterns(
    nodes: usize,
    edges: Vec<Edge>,
    peak: (f64, f64),
    horizon: f64,
    duration: (f64, f64),
    period: (f64, f64),
    kinds: Option<Vec<String>>,
    rng_seed: u64,
) -> PyResult<PyGroundTruth> {
    let kinds = match kinds {
        Some(k) => k.iter().map(|s| s.parse()).collect::<Result<Vec<_>, _>>().map_err(py_err)?,
        None => diffpath::PatternKind::ALL.to_vec(),
    };
    let config = synth::PatternConfig { peak, horizon, duration, period, kinds };
    Ok(PyGroundTruth(synth::assign_patterns(nodes, &edges, &config, rng_seed).map_err(py_err)?))
}

#[pyfunction]
#[pyo3(signature = (truth, model, steps, per_step, window, rng_seed=0))]
fn simulate_cascades(
    truth: PyRef<'_, PyGroundTruth>,
    model: PyRef<'_, PyModel>,
    steps: usize,
    per_step: usize,
    window: f64,
    rng_seed: u64,
) -> PyResult<Vec<PyCascade>> {
    let set = synth::generate_cascade_set(&truth.0, &model.0, steps, per_step, window, rng_seed).map_err(py_err)?;
    Ok(set.into_iter().map(PyCascade).collect())
}

/// One `(t, rates)` pair per time step.
#[pyfunction]
#[pyo3(signature = (cascades, t_start, t_end, config=None))]
fn infer_dynamic(
    cascades: Vec<PyRef<'_, PyCascade>>,
    t_start: f64,
    t_end: f64,
    config: Option<PyRef<'_, PyConfig>>,
) -> PyResult<Vec<(f64, Rates)>> {
    let config = config_or_default(config)?;
    let res = inference::infer_dynamic(&store(&cascades), (t_start, t_end), &config).map_err(py_err)?;
    Ok(res.snapshots.iter().map(|s| (s.time, rates(s))).collect())
}

#[pyfunction]
#[pyo3(signature = (cascades, config=None, max_epochs=50, tol=1e-4))]
fn infer_static(
    cascades: Vec<PyRef<'_, PyCascade>>,
    config: Option<PyRef<'_, PyConfig>>,
    max_epochs: usize,
    tol: f64,
) -> PyResult<Rates> {
    let config = config_or_default(config)?;
    let res = inference::infer_static(&store(&cascades), &config, max_epochs, tol).map_err(py_err)?;
    Ok(rates(&res.snapshot))
}

#[pyfunction]
fn precision_recall(inferred: Rates, truth: Rates) -> PyResult<(f64, f64)> {
    Ok(evaluation::precision_recall(&snapshot(inferred)?, &truth.keys().copied().collect()))
}

#[pyfunction]
fn accuracy(inferred: Rates, truth: Rates) -> PyResult<f64> {
    Ok(evaluation::accuracy(&snapshot(inferred)?, &snapshot(truth)?))
}

#[pyfunction]
fn mse(inferred: Rates, truth: Rates) -> PyResult<f64> {
    evaluation::mse(&snapshot(inferred)?, &snapshot(truth)?, None).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (rates, nodes, weighted=false))]
fn harmonic_centrality(rates: Rates, nodes: usize, weighted: bool) -> PyResult<Vec<f64>> {
    let distance = if weighted { evaluation::Distance::InverseRate } else { evaluation::Distance::Hops };
    Ok(evaluation::all_harmonic_centrality(&snapshot(rates)?, nodes, distance))
}

/// Returns `(cascades, names)`; `names` maps node id to name.
#[pyfunction]
#[pyo3(signature = (path, default_window=10.0))]
fn read_cascades(path: PathBuf, default_window: f64) -> PyResult<(Vec<PyCascade>, BTreeMap<NodeId, String>)> {
    let file = io::parse_cascade_file(&path, default_window).map_err(py_err)?;
    Ok((file.cascades.into_iter().map(PyCascade).collect(), file.nodes.names))
}

#[pymodule]
fn diffpath_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyCascade>()?;
    m.add_class::<PyGroundTruth>()?;
    m.add_class::<PyConfig>()?;
    m.add_function(wrap_pyfunction!(cascade_neg_log_likelihood, m)?)?;
    m.add_function(wrap_pyfunction!(cascade_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(generate_kronecker, m)?)?;
    m.add_function(wrap_pyfunction!(assign_patterns, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_cascades, m)?)?;
    m.add_function(wrap_pyfunction!(infer_dynamic, m)?)?;
    m.add_function(wrap_pyfunction!(infer_static, m)?)?;
    m.add_function(wrap_pyfunction!(precision_recall, m)?)?;
    m.add_function(wrap_pyfunction!(accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(mse, m)?)?;
    m.add_function(wrap_pyfunction!(harmonic_centrality, m)?)?;
    m.add_function(wrap_pyfunction!(read_cascades, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
