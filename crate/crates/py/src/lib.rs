//! Python bindings. Reports come back as plain dicts with the same layout as
//! the command line JSON.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;

use autodens::extremal::{build_problem, lower_density, upper_density};
use autodens::mullner::{cycle_notation, mullner_decompose};
use autodens::rational::fmt_q;
use autodens::structure::decompose;
use autodens::density::DensityTable;
use autodens::subseq::{self, natural_density_along, table_json, Along};
use autodens::verify::{compare, empirical_density, ExactValue};
use serde_json::{json, Value};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

fn along(s: &str) -> PyResult<Along> {
    s.parse().map_err(err)
}

fn table<'py>(py: Python<'py>, t: &DensityTable) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &table_json(t))
}

#[pyclass(name = "Dfao", module = "autodens_py")]
pub struct PyDfao {
    inner: autodens::Dfao,
}

#[pymethods]
impl PyDfao {
    /// Parses the text format read by the command line tool.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(PyDfao { inner: autodens::parse_dfao(text).map_err(err)? })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(err)?;
        Self::new(&text)
    }

    #[getter]
    fn base(&self) -> u32 {
        self.inner.base()
    }

    #[getter]
    fn states(&self) -> Vec<String> {
        self.inner.names().to_vec()
    }

    #[getter]
    fn alphabet(&self) -> Vec<String> {
        self.inner.alphabet()
    }

    fn evaluate(&self, n: u128) -> String {
        self.inner.evaluate(n).to_string()
    }

    fn prefix(&self, count: u128) -> Vec<String> {
        (0..count).map(|n| self.inner.evaluate(n).to_string()).collect()
    }

    fn minimize(&self) -> Self {
        PyDfao { inner: self.inner.minimize() }
    }

    fn power_base(&self, l: u32) -> PyResult<Self> {
        Ok(PyDfao { inner: self.inner.power_base(l).map_err(err)? })
    }

    fn equivalent(&self, other: &PyDfao) -> PyResult<bool> {
        self.inner.equivalent(&other.inner).map_err(err)
    }

    fn serialize(&self) -> String {
        self.inner.serialize()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Dfao(base={}, states={})", self.inner.base(), self.inner.len())
    }
}

/// Natural density along a subsequence, with the logarithmic density alongside.
#[pyfunction]
#[pyo3(signature = (a, along = "naturals"))]
fn density<'py>(py: Python<'py>, a: &PyDfao, along: &str) -> PyResult<Bound<'py, PyAny>> {
    let r = natural_density_along(&a.inner, self::along(along)?).map_err(err)?;
    let mut j = r.to_json();
    j["log_density"] = r.log.to_json()["log_density"].clone();
    to_py(py, &j)
}

#[pyfunction]
#[pyo3(signature = (a, along = "naturals"))]
fn log_density<'py>(py: Python<'py>, a: &PyDfao, along: &str) -> PyResult<Bound<'py, PyAny>> {
    let r = subseq::transfer_logdensity_default(&a.inner, self::along(along)?).map_err(err)?;
    to_py(py, &r.to_json())
}

/// Density along the primes of a primitive prolongable automaton.
#[pyfunction]
fn prime_density<'py>(py: Python<'py>, b: &PyDfao) -> PyResult<Bound<'py, PyAny>> {
    table(py, &subseq::prime_density(&b.inner).map_err(err)?)
}

#[pyfunction]
fn coprime_density<'py>(py: Python<'py>, b: &PyDfao, modulus: u64) -> PyResult<Bound<'py, PyAny>> {
    table(py, &subseq::coprime_density(&b.inner, modulus).map_err(err)?)
}

#[pyfunction]
fn square_density<'py>(py: Python<'py>, b: &PyDfao) -> PyResult<Bound<'py, PyAny>> {
    table(py, &subseq::square_density(&b.inner).map_err(err)?.outputs)
}

/// Upper and lower density of `alpha` over the sequences built from all
/// infinite digit strings.
#[pyfunction]
#[pyo3(signature = (a, alpha, along = "primes"))]
fn extremal<'py>(py: Python<'py>, a: &PyDfao, alpha: &str, along: &str) -> PyResult<Bound<'py, PyAny>> {
    let p = build_problem(&a.inner, self::along(along)?, alpha).map_err(err)?;
    let up = upper_density(&p).map_err(err)?;
    let lo = lower_density(&p).map_err(err)?;
    let j = json!({
        "upper": fmt_q(&up.value),
        "lower": fmt_q(&lo.value),
        "certificate": {
            "upper": up.certificate.digits_string(),
            "lower": lo.certificate.digits_string(),
        },
    });
    to_py(py, &j)
}

/// Group data of every primitive component.
#[pyfunction]
fn info<'py>(py: Python<'py>, a: &PyDfao) -> PyResult<Bound<'py, PyAny>> {
    let dec = decompose(&a.inner).map_err(err)?;
    let mut comps = Vec::new();
    for c in &dec.components {
        let md = mullner_decompose(&c.b).map_err(err)?;
        let gens: std::collections::BTreeSet<String> =
            md.labels.iter().map(|&g| cycle_notation(&md.group[g])).collect();
        comps.push(json!({
            "least": c.least.map(|x| x.to_string()),
            "c": md.c,
            "sets": md.sets.len(),
            "group_order": md.group.len(),
            "generators": gens,
            "d": md.d,
        }));
    }
    to_py(py, &json!({ "base": dec.base(), "components": comps }))
}

/// Compares exact densities with frequencies over the first `limit` terms.
#[pyfunction]
#[pyo3(signature = (a, along = "naturals", limit = 100_000, log = false, tol = 0.01))]
fn verify<'py>(py: Python<'py>, a: &PyDfao, along: &str, limit: u64, log: bool, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let along = self::along(along)?;
    let r = natural_density_along(&a.inner, along).map_err(err)?;
    let exact: BTreeMap<String, ExactValue> = if log {
        r.log.values.iter().map(|(s, v)| (s.clone(), ExactValue::Log(v.clone()))).collect()
    } else {
        match &r.values {
            Some(t) => t.iter().map(|(s, v)| (s.clone(), ExactValue::Rational(v.clone()))).collect(),
            None => return Err(err(format!("the density along {along} does not exist; use log=True"))),
        }
    };
    let emp = empirical_density(&a.inner, along, limit).map_err(err)?;
    let cmp = compare(&exact, if log { &emp.log } else { &emp.natural }, tol);
    to_py(py, &json!({ "empirical": emp.to_json(), "comparison": cmp.to_json() }))
}

#[pyfunction]
fn qr_count(m: u64, h: u64) -> PyResult<String> {
    if h == 0 {
        return Err(err("modulus must be positive"));
    }
    Ok(fmt_q(&subseq::qr_count(m, h)))
}

/// Adds the class and functions to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDfao>()?;
    m.add_function(wrap_pyfunction!(density, m)?)?;
    m.add_function(wrap_pyfunction!(log_density, m)?)?;
    m.add_function(wrap_pyfunction!(prime_density, m)?)?;
    m.add_function(wrap_pyfunction!(coprime_density, m)?)?;
    m.add_function(wrap_pyfunction!(square_density, m)?)?;
    m.add_function(wrap_pyfunction!(extremal, m)?)?;
    m.add_function(wrap_pyfunction!(info, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(qr_count, m)?)?;
    Ok(())
}

#[pymodule]
fn autodens_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
