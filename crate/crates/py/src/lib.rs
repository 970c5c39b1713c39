//! Python bindings: p-adic numbers, discs, orbit registries and the truncated complex.

use bt_coeff::cli;
use bt_coeff::complex::{verify_exactness, ComplexModel};
use bt_coeff::projline::{Ball, Chart, ProjPoint, GL2};
use bt_coeff::{BtTree, OrbitRegistry, PadicConfig, PadicNum};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn config(p: u32, prec: Option<u32>) -> PyResult<PadicConfig> {
    PadicConfig::new(p, prec.unwrap_or_else(|| PadicConfig::max_precision(p).min(40))).map_err(err)
}

fn json<T: serde::Serialize>(x: &T) -> String {
    serde_json::to_string(x).expect("serializable")
}

/// A p-adic number with capped relative precision.
#[pyclass(name = "Padic", module = "bt_coeff", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPadic(PadicNum);

impl PyPadic {
    fn same_field(&self, other: &PyPadic) -> PyResult<()> {
        if self.0.config() != other.0.config() {
            return Err(PyValueError::new_err("operands live in different p-adic fields"));
        }
        Ok(())
    }
}

#[pymethods]
impl PyPadic {
    /// Accepts integers, fractions such as "1/3" and digit strings "vV:uDDD".
    #[new]
    #[pyo3(signature = (p, value, prec = None))]
    fn new(p: u32, value: &str, prec: Option<u32>) -> PyResult<Self> {
        Ok(PyPadic(config(p, prec)?.parse(value).map_err(err)?))
    }

    #[getter]
    fn p(&self) -> u32 {
        self.0.p()
    }

    #[getter]
    fn prec(&self) -> u32 {
        self.0.config().prec()
    }

    /// `None` for zero.
    #[getter]
    fn valuation(&self) -> Option<i64> {
        (!self.0.is_zero()).then(|| self.0.val())
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn inverse(&self) -> PyResult<Self> {
        Ok(PyPadic(self.0.checked_inv().map_err(err)?))
    }

    fn __add__(&self, other: &PyPadic) -> PyResult<Self> {
        self.same_field(other)?;
        Ok(PyPadic(self.0 + other.0))
    }

    fn __sub__(&self, other: &PyPadic) -> PyResult<Self> {
        self.same_field(other)?;
        Ok(PyPadic(self.0 - other.0))
    }

    fn __mul__(&self, other: &PyPadic) -> PyResult<Self> {
        self.same_field(other)?;
        Ok(PyPadic(self.0 * other.0))
    }

    fn __truediv__(&self, other: &PyPadic) -> PyResult<Self> {
        self.same_field(other)?;
        Ok(PyPadic(self.0.checked_div(&other.0).map_err(err)?))
    }

    fn __neg__(&self) -> Self {
        PyPadic(-self.0)
    }

    /// Equality at working precision.
    fn __eq__(&self, other: &PyPadic) -> bool {
        self.0.config() == other.0.config() && (self.0 - other.0).is_zero()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Padic({}, '{}')", self.0.p(), self.0)
    }
}

/// A closed disc of the projective line, in the z- or w-chart.
#[pyclass(name = "Ball", module = "bt_coeff", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyBall(Ball);

#[pymethods]
impl PyBall {
    /// `{v(z - center) >= m}`
    #[staticmethod]
    fn z(center: &PyPadic, m: i64) -> PyResult<Self> {
        Ok(PyBall(Ball::z(center.0, m).map_err(err)?))
    }

    /// `{inf} ∪ {v(z - center) <= -m}`
    #[staticmethod]
    fn w(center: &PyPadic, m: i64) -> PyResult<Self> {
        Ok(PyBall(Ball::w(center.0, m).map_err(err)?))
    }

    #[getter]
    fn chart(&self) -> &'static str {
        match self.0.chart() {
            Chart::Z => "z",
            Chart::W => "w",
        }
    }

    #[getter]
    fn center(&self) -> PyPadic {
        PyPadic(self.0.center())
    }

    #[getter]
    fn m(&self) -> i64 {
        self.0.m()
    }

    /// Membership of a finite point, or of infinity when `z` is `None`.
    #[pyo3(signature = (z = None))]
    fn contains(&self, z: Option<&PyPadic>) -> PyResult<bool> {
        let pt = match z {
            Some(z) => ProjPoint::finite(z.0),
            None => ProjPoint::infinity(self.0.config()),
        };
        self.0.contains(&pt).map_err(err)
    }

    fn is_subset(&self, other: &PyBall) -> PyResult<bool> {
        self.0.is_subset(&other.0).map_err(err)
    }

    fn complement(&self) -> Self {
        PyBall(self.0.complement())
    }

    /// Image under `z -> (az + c) / (bz + d)`.
    fn image(&self, a: &PyPadic, b: &PyPadic, c: &PyPadic, d: &PyPadic) -> PyResult<Self> {
        Ok(PyBall(self.0.image(&GL2::new(a.0, b.0, c.0, d.0)).map_err(err)?))
    }

    /// Invariant measure as `(numerator, denominator)`.
    fn measure(&self) -> (i128, i128) {
        let r = self.0.measure();
        (*r.numer(), *r.denom())
    }

    fn __eq__(&self, other: &PyBall) -> bool {
        self.0 == other.0
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Ball('{}')", self.0)
    }
}

/// Orbit records of the congruence subgroups of level `k` on the tree ball of radius `n`.
#[pyclass(name = "Registry", module = "bt_coeff", frozen)]
struct PyRegistry(OrbitRegistry);

#[pymethods]
impl PyRegistry {
    #[new]
    #[pyo3(signature = (p, k, n, prec = None))]
    fn new(p: u32, k: u32, n: u32, prec: Option<u32>) -> PyResult<Self> {
        let tree = BtTree::new(config(p, prec)?);
        Ok(PyRegistry(OrbitRegistry::build(&tree, n, k).map_err(err)?))
    }

    fn __len__(&self) -> usize {
        self.0.records.len()
    }

    fn minimal(&self) -> Vec<PyBall> {
        self.0.minimal_orbits().iter().map(|r| PyBall(r.ball)).collect()
    }

    /// Counting report as JSON.
    fn counts(&self) -> PyResult<String> {
        Ok(json(&self.0.verify_counts().map_err(err)?))
    }

    /// All records as JSON.
    fn records(&self) -> String {
        json(&self.0.records)
    }
}

/// The truncated complex of degree `d`.
#[pyclass(name = "Complex", module = "bt_coeff", frozen)]
struct PyComplex(ComplexModel);

#[pymethods]
impl PyComplex {
    #[new]
    #[pyo3(signature = (p, k, n, d, prec = None))]
    fn new(p: u32, k: u32, n: u32, d: usize, prec: Option<u32>) -> PyResult<Self> {
        let reg = OrbitRegistry::build(&BtTree::new(config(p, prec)?), n, k).map_err(err)?;
        Ok(PyComplex(ComplexModel::new(reg, d).map_err(err)?))
    }

    /// Numbers of edge records, vertex records and minimal records.
    fn sizes(&self) -> (usize, usize, usize) {
        (self.0.edge_record_ids().len(), self.0.vertex_record_ids().len(), self.0.minimal_record_ids().len())
    }

    /// Exactness report as JSON.
    #[pyo3(signature = (seed = 0, lifts = 50))]
    fn verify(&self, seed: u64, lifts: usize) -> PyResult<String> {
        Ok(json(&verify_exactness(&self.0, seed, lifts).map_err(err)?))
    }

    /// Block structure of the boundary matrix as JSON.
    fn matrix(&self) -> PyResult<String> {
        Ok(json(&self.0.assemble_dbar1().map_err(err)?))
    }
}

/// DOT rendering of the tree ball of radius `n`.
#[pyfunction]
fn tree_dot(p: u32, n: u32) -> PyResult<String> {
    Ok(BtTree::new(config(p, None)?).to_dot(n))
}

/// Whether the worked example matrix matches its stored block structure.
#[pyfunction]
fn example_matches() -> PyResult<bool> {
    Ok(cli::compare_example(40).map_err(err)?.matches)
}

/// Runs the command-line driver on `args` (without the program name).
#[pyfunction]
fn run_cli(args: Vec<String>) -> i32 {
    cli::run(std::iter::once("bt-coeff".to_string()).chain(args)) as i32
}

#[pymodule]
#[pyo3(name = "bt_coeff")]
fn bt_coeff_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPadic>()?;
    m.add_class::<PyBall>()?;
    m.add_class::<PyRegistry>()?;
    m.add_class::<PyComplex>()?;
    m.add_function(wrap_pyfunction!(tree_dot, m)?)?;
    m.add_function(wrap_pyfunction!(example_matches, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
