//! Python bindings: curves go in as lists of floats, partitions come back as
//! lists of id lists.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use warpclust_core::indices::{self, Inter, Intra};
use warpclust_core::pipeline::{self, Alignment};
use warpclust_core::simulation::{self, Scenario, ScenarioKind};
use warpclust_core::{ClusterIndex, CurveSet, DistanceMatrix, Error, Partition};

fn py_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(py_err)
}

fn curve_set(curves: Vec<Vec<f64>>, t: Option<Vec<f64>>, ids: Option<Vec<usize>>) -> PyResult<CurveSet> {
    let n = curves.first().map_or(0, Vec::len);
    let grid = t.unwrap_or_else(|| (0..n).map(|i| i as f64 / (n.max(2) - 1) as f64).collect());
    let ids = ids.unwrap_or_else(|| (0..curves.len()).collect());
    if ids.len() != curves.len() {
        return Err(PyValueError::new_err("ids and curves differ in length"));
    }
    CurveSet::new(grid, ids.into_iter().zip(curves).collect()).map_err(py_err)
}

fn partition(groups: Vec<Vec<usize>>) -> PyResult<Partition> {
    Partition::new(groups).map_err(py_err)
}

/// Settings of a clustering run.
#[pyclass(get_all, set_all)]
struct RunConfig {
    lambda0: f64,
    quantile_a: f64,
    /// "silhouette" or "dunn".
    index: String,
    dunn_inter: String,
    dunn_intra: String,
    grid_size: usize,
    max_iterations: usize,
    stability_tol: f64,
    seed: u64,
    report_warps: bool,
}

#[pymethods]
impl RunConfig {
    #[new]
    #[pyo3(signature = (lambda0=0.0, quantile_a=0.25, index="silhouette".to_string(), dunn_inter="I1".to_string(), dunn_intra="J1".to_string(), grid_size=500, max_iterations=10, stability_tol=1e-3, seed=0, report_warps=true))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        lambda0: f64,
        quantile_a: f64,
        index: String,
        dunn_inter: String,
        dunn_intra: String,
        grid_size: usize,
        max_iterations: usize,
        stability_tol: f64,
        seed: u64,
        report_warps: bool,
    ) -> Self {
        Self {
            lambda0,
            quantile_a,
            index,
            dunn_inter,
            dunn_intra,
            grid_size,
            max_iterations,
            stability_tol,
            seed,
            report_warps,
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "RunConfig(lambda0={}, index={:?}, grid_size={}, max_iterations={})",
            self.lambda0, self.index, self.grid_size, self.max_iterations
        )
    }
}

impl RunConfig {
    fn to_core(&self) -> PyResult<pipeline::RunConfig> {
        let index = match self.index.to_ascii_lowercase().as_str() {
            "silhouette" => ClusterIndex::Silhouette,
            "dunn" => ClusterIndex::Dunn {
                inter: parse(&self.dunn_inter)?,
                intra: parse(&self.dunn_intra)?,
            },
            other => return Err(PyValueError::new_err(format!("unknown index {other}"))),
        };
        let c = pipeline::RunConfig {
            lambda0: self.lambda0,
            quantile_a: self.quantile_a,
            index,
            grid_size: self.grid_size,
            max_iterations: self.max_iterations,
            stability_tol: self.stability_tol,
            seed: self.seed,
            report_warps: self.report_warps,
            ..Default::default()
        };
        c.validate().map_err(py_err)?;
        Ok(c)
    }
}

/// Outcome of `cluster`.
#[pyclass(frozen)]
struct RunResult {
    inner: pipeline::RunResult,
}

#[pymethods]
impl RunResult {
    #[getter]
    fn partition(&self) -> Vec<Vec<usize>> {
        self.inner.partition.groups().to_vec()
    }

    #[getter]
    fn threshold(&self) -> f64 {
        self.inner.threshold
    }

    #[getter]
    fn index_name(&self) -> String {
        self.inner.index_name.clone()
    }

    #[getter]
    fn index_value(&self) -> Option<f64> {
        self.inner.index_value
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    /// `(threshold, partition, index value)` for every candidate.
    #[getter]
    fn candidates(&self) -> Vec<(f64, Vec<Vec<usize>>, Option<f64>)> {
        self.inner
            .candidates
            .iter()
            .map(|c| (c.threshold, c.partition.groups().to_vec(), c.nu0))
            .collect()
    }

    /// Per curve id, the `(t, psi(t))` samples of its aligning warp.
    #[getter]
    fn warps(&self) -> Option<Vec<(usize, Vec<(f64, f64)>)>> {
        self.inner
            .warps
            .as_ref()
            .map(|w| w.iter().map(|(k, v)| (*k, v.clone())).collect())
    }

    /// The same JSON the command-line tool writes.
    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        let value = self.inner.index_value.map_or("None".to_string(), |v| v.to_string());
        format!(
            "RunResult(partition={:?}, threshold={:.4}, {}={value})",
            self.inner.partition.groups(),
            self.inner.threshold,
            self.inner.index_name,
        )
    }
}

/// Clusters curves sampled on a shared grid `t` (default: equally spaced on
/// [0, 1]).
#[pyfunction]
#[pyo3(signature = (curves, t=None, ids=None, config=None))]
fn cluster(
    py: Python<'_>,
    curves: Vec<Vec<f64>>,
    t: Option<Vec<f64>>,
    ids: Option<Vec<usize>>,
    config: Option<PyRef<'_, RunConfig>>,
) -> PyResult<RunResult> {
    let set = curve_set(curves, t, ids)?;
    let config = match config {
        Some(c) => c.to_core()?,
        None => pipeline::RunConfig::default(),
    };
    let inner = py.detach(|| pipeline::run(&set, &config)).map_err(py_err)?;
    Ok(RunResult { inner })
}

fn alignment_dict<'py>(py: Python<'py>, a: &Alignment) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let d = pyo3::types::PyDict::new(py);
    d.set_item("rho", a.rho)?;
    d.set_item("r_fwd", a.r_fwd)?;
    d.set_item("r_inv", a.r_inv)?;
    d.set_item("penalty_fwd", a.penalty_fwd)?;
    d.set_item("penalty_inv", a.penalty_inv)?;
    d.set_item("warp", a.warp.clone())?;
    d.set_item("inverse", a.inverse.clone())?;
    Ok(d)
}

/// Penalized similarity of two curves and the warp aligning `g` to `f`.
#[pyfunction]
#[pyo3(signature = (f, g, t=None, lambda0=0.0, grid_size=500))]
fn similarity<'py>(
    py: Python<'py>,
    f: Vec<f64>,
    g: Vec<f64>,
    t: Option<Vec<f64>>,
    lambda0: f64,
    grid_size: usize,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let set = curve_set(vec![f, g], t, None)?;
    let config = pipeline::RunConfig {
        lambda0,
        grid_size,
        ..Default::default()
    };
    let a = py.detach(|| pipeline::align_pair(&set, 0, 1, &config)).map_err(py_err)?;
    alignment_dict(py, &a)
}

/// Generates a simulated scenario; returns `(t, curves, labels)`.
#[pyfunction]
#[pyo3(signature = (scenario, sizes=None, sigma=None, points=100, seed=0, alphas=None))]
fn simulate(
    scenario: &str,
    sizes: Option<Vec<usize>>,
    sigma: Option<f64>,
    points: usize,
    seed: u64,
    alphas: Option<Vec<f64>>,
) -> PyResult<(Vec<f64>, Vec<Vec<f64>>, Vec<String>)> {
    let mut sc = Scenario::new(parse::<ScenarioKind>(scenario)?);
    if let Some(s) = sizes {
        sc.sizes = s;
    }
    if let Some(s) = sigma {
        sc.sigma = s;
    }
    if let Some(a) = alphas {
        sc.alphas = a;
    }
    sc.n_points = points;
    sc.seed = seed;
    let sim = simulation::generate(&sc).map_err(py_err)?;
    Ok((
        sim.grid,
        sim.curves.into_iter().map(|c| c.1).collect(),
        sim.labels.into_iter().map(|l| l.1).collect(),
    ))
}

#[pyfunction]
fn adjusted_rand(p: Vec<Vec<usize>>, q: Vec<Vec<usize>>) -> PyResult<f64> {
    warpclust_core::adjusted_rand(&partition(p)?, &partition(q)?).map_err(py_err)
}

fn square_distances(dist: Vec<Vec<f64>>) -> PyResult<DistanceMatrix> {
    let n = dist.len();
    if dist.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("distance matrix must be square"));
    }
    let pairs = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).map(|(a, b)| ((a, b), dist[a][b]));
    DistanceMatrix::from_pairs(pairs).map_err(py_err)
}

/// Silhouette of `groups` (ids index the rows of `dist`).
#[pyfunction]
fn silhouette(groups: Vec<Vec<usize>>, dist: Vec<Vec<f64>>) -> PyResult<f64> {
    let p = partition(groups)?;
    indices::silhouette(p.groups(), &square_distances(dist)?).map_err(py_err)
}

/// Dunn index with inter-cluster distance `I1`-`I3` and intra-cluster
/// distance `J1`-`J2`.
#[pyfunction]
#[pyo3(signature = (groups, dist, inter="I1", intra="J1"))]
fn dunn(groups: Vec<Vec<usize>>, dist: Vec<Vec<f64>>, inter: &str, intra: &str) -> PyResult<f64> {
    let p = partition(groups)?;
    indices::dunn(p.groups(), &square_distances(dist)?, parse::<Inter>(inter)?, parse::<Intra>(intra)?).map_err(py_err)
}

#[pymodule]
fn warpclust(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<RunConfig>()?;
    m.add_class::<RunResult>()?;
    m.add_function(wrap_pyfunction!(cluster, m)?)?;
    m.add_function(wrap_pyfunction!(similarity, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(adjusted_rand, m)?)?;
    m.add_function(wrap_pyfunction!(silhouette, m)?)?;
    m.add_function(wrap_pyfunction!(dunn, m)?)?;
    Ok(())
}
