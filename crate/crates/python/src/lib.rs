//! Python module `ptorsion`: run configurations, inspect solved fields and
//! evaluate p-distances from Python.

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ptorsion_core::config::validate as validate_config;
use ptorsion_core::distance::{closest_points, CLUSTER_RADIUS};
use ptorsion_core::pnorm::{self, LineCoeffs};
use ptorsion_core::report::{compute, RunArtifacts};
use ptorsion_core::solver::Region;
use ptorsion_core::{Error, ExponentPair, RunConfig, RunReport, Vec2};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::IterationLimit { .. } => PyRuntimeError::new_err(e.to_string()),
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn exponent(p: f64) -> PyResult<ExponentPair> {
    ExponentPair::new(p).map_err(py_err)
}

fn parse(config: &str) -> PyResult<RunConfig> {
    let c = RunConfig::parse(config).map_err(py_err)?;
    c.validate().map_err(py_err)?;
    Ok(c)
}

/// `(|x|^p + |y|^p)^(1/p)`.
#[pyfunction]
fn gamma_p(x: f64, y: f64, p: f64) -> PyResult<f64> {
    Ok(pnorm::gamma_p(Vec2::new(x, y), exponent(p)?))
}

/// p-distance from `(x, y)` to the line `a x + b y + c = 0`.
#[pyfunction]
fn p_dist_point_line(x: f64, y: f64, a: f64, b: f64, c: f64, p: f64) -> PyResult<f64> {
    let line = LineCoeffs::new(a, b, c).map_err(py_err)?;
    Ok(pnorm::p_dist_point_line(Vec2::new(x, y), &line, exponent(p)?))
}

/// Unit direction of the p-bisector of the angle between two rays.
#[pyfunction]
fn p_bisector(side1: (f64, f64), side2: (f64, f64), p: f64) -> PyResult<(f64, f64)> {
    let v = pnorm::p_bisector_direction(side1.into(), side2.into(), exponent(p)?).map_err(py_err)?;
    Ok((v.x, v.y))
}

/// Domain warnings for a configuration, without solving.
#[pyfunction]
fn validate(config: &str) -> PyResult<Vec<String>> {
    validate_config(&parse(config)?).map_err(py_err)
}

/// p-distance to the boundary of the configured shape, and the number of
/// closest boundary points, at each query point.
#[pyfunction]
fn distance(config: &str, points: Vec<(f64, f64)>) -> PyResult<Vec<(f64, usize)>> {
    let c = parse(config)?;
    let e = c.exponent().map_err(py_err)?;
    let domain = c.shape.build().map_err(py_err)?;
    points
        .into_iter()
        .map(|(x, y)| {
            let cp = closest_points(Vec2::new(x, y), &domain, e, CLUSTER_RADIUS).map_err(py_err)?;
            Ok((cp.distance, cp.multiplicity))
        })
        .collect()
}

/// Run a configuration, write its output files to `out_dir`, and return the
/// report as JSON.
#[pyfunction]
fn run(py: Python<'_>, config: &str, out_dir: &str) -> PyResult<String> {
    let mut c = parse(config)?;
    c.out_dir = out_dir.into();
    let report = py.detach(|| ptorsion_core::run(&c)).map_err(py_err)?;
    serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// A solved instance. Node fields are flat, row-major lists of length
/// `nx * ny`; node `(i, j)` sits at `origin + h (i, j)`.
#[pyclass(module = "ptorsion", frozen)]
struct Solution {
    report: RunReport,
    artifacts: RunArtifacts,
}

#[pymethods]
impl Solution {
    #[getter]
    fn h(&self) -> f64 {
        self.artifacts.map.grid().h
    }
    #[getter]
    fn shape(&self) -> (usize, usize) {
        let g = self.artifacts.map.grid();
        (g.nx, g.ny)
    }
    #[getter]
    fn origin(&self) -> (f64, f64) {
        let g = self.artifacts.map.grid();
        (g.i0 as f64 * g.h, g.j0 as f64 * g.h)
    }
    #[getter]
    fn u(&self) -> Vec<f64> {
        self.artifacts.solution.u.values.clone()
    }
    #[getter]
    fn d_p(&self) -> Vec<f64> {
        self.artifacts.map.field.values.clone()
    }
    /// `elastic`, `plastic`, `boundary` or `exterior` per node.
    #[getter]
    fn regions(&self) -> Vec<&'static str> {
        self.artifacts.regions.labels.iter().map(|r| r.as_str()).collect()
    }
    #[getter]
    fn plastic_nodes(&self) -> usize {
        self.artifacts.regions.count(Region::Plastic)
    }
    /// `(arc, t, delta, x, y)` for free-boundary samples inside the domain.
    #[getter]
    fn free_boundary(&self) -> Vec<(usize, f64, f64, f64, f64)> {
        self.artifacts
            .free_boundary
            .interior_points()
            .map(|s| (s.arc, s.t, s.delta, s.point.x, s.point.y))
            .collect()
    }
    #[getter]
    fn ridge_nodes(&self) -> Vec<usize> {
        self.artifacts.ridge.nodes().collect()
    }
    #[getter]
    fn passed(&self) -> bool {
        self.report.passed
    }
    /// `(name, passed, worst_margin)` for every check that ran.
    #[getter]
    fn checks(&self) -> Vec<(String, bool, f64)> {
        self.report.checks.iter().map(|c| (c.name.clone(), c.passed, c.worst_margin)).collect()
    }
    fn report_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.report).map_err(|e| PyValueError::new_err(e.to_string()))
    }
}

/// Solve a configuration in memory. Raises `RuntimeError` when the solver
/// does not converge.
#[pyfunction]
fn solve(py: Python<'_>, config: &str) -> PyResult<Solution> {
    let c = parse(config)?;
    let (report, artifacts) = py.detach(|| compute(&c)).map_err(py_err)?;
    match artifacts {
        Some(artifacts) => Ok(Solution { report, artifacts }),
        None => Err(PyRuntimeError::new_err(report.error.unwrap_or_else(|| "solver failed".into()))),
    }
}

#[pymodule]
pub fn ptorsion(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(gamma_p, m)?)?;
    m.add_function(wrap_pyfunction!(p_dist_point_line, m)?)?;
    m.add_function(wrap_pyfunction!(p_bisector, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(distance, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_class::<Solution>()?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
