use std::path::PathBuf;

use blendplan::bench::{
    cmd_export, run_instance, ExperimentConfig, ExperimentMethod, InstanceSource, PeriodKind, RollingConfig,
};
use blendplan::instance::{self, synth};
use blendplan::sim::{self, FlowPlan};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(blendplan, InfeasibleError, PyRuntimeError, "No feasible schedule was found.");

fn py_err(e: blendplan::Error) -> PyErr {
    if e.is_infeasible() {
        InfeasibleError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Planning data: specs, barges, tanks, blend runs, and operating limits.
#[pyclass(name = "Instance", module = "blendplan")]
#[derive(Clone)]
pub struct PyInstance {
    pub inner: instance::Instance,
}

#[pymethods]
impl PyInstance {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        instance::from_json_str(text, "<python>").map(|inner| PyInstance { inner }).map_err(py_err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        instance::read_instance(path).map(|inner| PyInstance { inner }).map_err(py_err)
    }

    #[staticmethod]
    fn tiny(seed: u64) -> Self {
        PyInstance { inner: synth::tiny(seed) }
    }

    #[staticmethod]
    fn small(seed: u64, horizon: u32) -> Self {
        PyInstance {
            inner: synth::small(seed, horizon),
        }
    }

    #[staticmethod]
    fn three_tank() -> Self {
        PyInstance {
            inner: synth::reference_three_tank(),
        }
    }

    /// The reference data repeated to `start + horizon` days with randomized supply, then cropped.
    #[staticmethod]
    #[pyo3(signature = (seed, start=0, horizon=119))]
    fn reference(seed: u64, start: u32, horizon: u32) -> PyResult<Self> {
        InstanceSource::Reference { seed, start, horizon }
            .load()
            .map(|inner| PyInstance { inner })
            .map_err(py_err)
    }

    fn crop(&self, start: u32, horizon: u32) -> PyResult<Self> {
        instance::crop(&self.inner, start, horizon)
            .map(|inner| PyInstance { inner })
            .map_err(py_err)
    }

    fn to_json(&self) -> String {
        instance::to_json_string(&self.inner)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        instance::write_instance(&self.inner, path).map_err(py_err)
    }

    /// Structural problems, one string each; empty when the instance is valid.
    fn validate(&self) -> Vec<String> {
        instance::validate_instance(&self.inner)
            .violations
            .iter()
            .map(|v| v.to_string())
            .collect()
    }

    #[getter]
    fn horizon(&self) -> u32 {
        self.inner.ops.horizon
    }

    #[getter]
    fn specs(&self) -> Vec<String> {
        self.inner.specs.iter().map(|s| s.id.clone()).collect()
    }

    #[getter]
    fn barges(&self) -> Vec<String> {
        self.inner.barges.iter().map(|b| b.id.clone()).collect()
    }

    #[getter]
    fn tanks(&self) -> Vec<String> {
        self.inner.tanks.iter().map(|t| t.id.clone()).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(horizon={}, barges={}, tanks={}, runs={})",
            self.inner.ops.horizon,
            self.inner.barges.len(),
            self.inner.tanks.len(),
            self.inner.runs.len()
        )
    }
}

/// Daily unloads, feeds, and on/off indicators.
#[pyclass(name = "Plan", module = "blendplan")]
#[derive(Clone)]
pub struct PyPlan {
    pub inner: FlowPlan,
}

#[pymethods]
impl PyPlan {
    /// The do-nothing plan.
    #[staticmethod]
    fn empty(instance: &PyInstance) -> Self {
        PyPlan {
            inner: FlowPlan::empty(&instance.inner),
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text)
            .map(|inner| PyPlan { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        FlowPlan::read(path).map(|inner| PyPlan { inner }).map_err(py_err)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("plan serializes")
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.write(path).map_err(py_err)
    }

    /// Unloaded volume as `[barge][tank][day]`.
    #[getter]
    fn y_in(&self) -> Vec<Vec<Vec<f64>>> {
        self.inner.y_in.clone()
    }

    /// Fed volume as `[tank][day]`.
    #[getter]
    fn y_out(&self) -> Vec<Vec<f64>> {
        self.inner.y_out.clone()
    }
}

/// Outcome of [`solve`].
#[pyclass(name = "Run", module = "blendplan")]
pub struct PyRun {
    #[pyo3(get)]
    plan: PyPlan,
    record: blendplan::bench::RunRecord,
    report: sim::FeasibilityReport,
    loss: sim::Loss,
}

#[pymethods]
impl PyRun {
    #[getter]
    fn record<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.record)
    }

    #[getter]
    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.report)
    }

    #[getter]
    fn pct_loss(&self) -> f64 {
        self.loss.pct_loss
    }

    #[getter]
    fn status(&self) -> &str {
        &self.record.status
    }

    #[getter]
    fn feasible(&self) -> bool {
        self.report.is_feasible()
    }

    fn __repr__(&self) -> String {
        format!(
            "Run(status={}, pct_loss={:.4}, violations={})",
            self.record.status,
            self.loss.pct_loss,
            self.report.violations.len()
        )
    }
}

/// Builds and solves a model, then simulates and audits the plan it yields.
///
/// `scheme` selects rolling horizon ("full" or "partial"); without it the whole horizon is solved at once.
#[pyfunction]
#[pyo3(signature = (
    instance, method="center", eps_hat=vec![1.0], *, buffers=true, coupling=false, relax_avol=false,
    scheme=None, periods="run", dt=4, h_nf=90, n_present=2, n_step=2,
    mip_gap=None, time_limit=None, threads=None, seed=None
))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    instance: &PyInstance,
    method: &str,
    eps_hat: Vec<f64>,
    buffers: bool,
    coupling: bool,
    relax_avol: bool,
    scheme: Option<&str>,
    periods: &str,
    dt: u32,
    h_nf: u32,
    n_present: usize,
    n_step: usize,
    mip_gap: Option<f64>,
    time_limit: Option<f64>,
    threads: Option<u32>,
    seed: Option<u64>,
) -> PyResult<PyRun> {
    let m: ExperimentMethod = method.parse().map_err(py_err)?;
    let mut cfg = ExperimentConfig::new(InstanceSource::File { path: "python".into() }, m, 1.0);
    cfg.eps_hat = eps_hat;
    cfg.buffers = buffers;
    cfg.center.coupling = coupling;
    cfg.center.relax_avol = relax_avol;
    if let Some(s) = scheme {
        let periods = match periods {
            "run" => PeriodKind::Run,
            "fixed" => PeriodKind::Fixed,
            other => return Err(PyValueError::new_err(format!("unknown period kind `{other}`"))),
        };
        cfg.rolling = Some(RollingConfig {
            scheme: s.parse().map_err(py_err)?,
            periods,
            dt,
            h_nf,
            n_present,
            n_step,
        });
    }
    if let Some(g) = mip_gap {
        cfg.solve.mip_gap = g;
    }
    if let Some(t) = time_limit {
        cfg.solve.time_limit = t;
    }
    if let Some(t) = threads {
        cfg.solve.threads = t;
    }
    if let Some(s) = seed {
        cfg.solve.seed = s;
    }
    let inst = instance.inner.clone();
    let (record, art) = py.allow_threads(|| run_instance(&cfg, inst)).map_err(py_err)?;
    Ok(PyRun {
        plan: PyPlan { inner: art.plan },
        record,
        report: art.report,
        loss: art.loss,
    })
}

/// Daily tank volumes and qualities under a plan.
#[pyfunction]
fn simulate<'py>(py: Python<'py>, instance: &PyInstance, plan: &PyPlan) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &sim::simulate(&instance.inner, &plan.inner).map_err(py_err)?)
}

/// Violations of the original requirements, with demand misses listed apart.
#[pyfunction]
fn audit<'py>(py: Python<'py>, instance: &PyInstance, plan: &PyPlan) -> PyResult<Bound<'py, PyAny>> {
    let trace = sim::simulate(&instance.inner, &plan.inner).map_err(py_err)?;
    to_py(py, &sim::audit(&instance.inner, &trace, &plan.inner).map_err(py_err)?)
}

#[pyfunction]
fn loss<'py>(py: Python<'py>, instance: &PyInstance, plan: &PyPlan) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &sim::loss(&instance.inner, &plan.inner).map_err(py_err)?)
}

/// Writes the model as MPS or LP plus a JSON sidecar and returns the model path.
#[pyfunction]
#[pyo3(signature = (instance, method, directory, eps_hat=vec![1.0], stem=None))]
fn export(
    instance: &PyInstance,
    method: &str,
    directory: PathBuf,
    eps_hat: Vec<f64>,
    stem: Option<String>,
) -> PyResult<PathBuf> {
    let m: ExperimentMethod = method.parse().map_err(py_err)?;
    let stem = stem.unwrap_or_else(|| m.as_str().to_string());
    cmd_export(&instance.inner, m, &eps_hat, &directory, &stem).map_err(py_err)
}

#[pymodule]
pub fn blendplan_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PyPlan>()?;
    m.add_class::<PyRun>()?;
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(audit, m)?)?;
    m.add_function(wrap_pyfunction!(loss, m)?)?;
    m.add_function(wrap_pyfunction!(export, m)?)?;
    Ok(())
}
