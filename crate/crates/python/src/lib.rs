//! Python module `keypoly`.

use std::path::Path;
use std::sync::Arc;

use keypoly_core::cli::{exit_code, BranchKind, Overrides, Problem as CoreProblem, ProblemSpec};
use keypoly_core::engine::{run, AlgorithmTrace};
use keypoly_core::ordgroup::{GroupElement, GroupSpec};
use keypoly_core::polygon::NewtonPolygon;
use keypoly_core::report::{presentation, svg_bundle, text_report, to_json, ReportOptions};
use pyo3::basic::CompareOp;
use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// `Q`, `sqrtD` or `lex(A,B,...)`.
fn parse_group(s: &str) -> Result<GroupSpec, String> {
    let t = s.trim();
    if t == "Q" {
        return Ok(GroupSpec::Rational);
    }
    if let Some(d) = t.strip_prefix("sqrt") {
        let d: u64 = d.parse().map_err(|_| format!("bad group {s:?}"))?;
        return GroupSpec::quadratic(d).map_err(|e| e.to_string());
    }
    if let Some(inner) = t.strip_prefix("lex(").and_then(|r| r.strip_suffix(')')) {
        let members = inner.split(',').map(parse_group).collect::<Result<Vec<_>, _>>()?;
        return GroupSpec::lex(members).map_err(|e| e.to_string());
    }
    Err(format!("bad group {s:?}"))
}

/// An element of an ordered value group, or infinity.
#[pyclass(name = "Value", frozen, from_py_object)]
#[derive(Clone)]
struct PyValue {
    spec: Arc<GroupSpec>,
    inner: GroupElement,
}

#[pymethods]
impl PyValue {
    #[new]
    #[pyo3(signature = (text, group = "Q"))]
    fn new(text: &str, group: &str) -> PyResult<Self> {
        let spec = Arc::new(parse_group(group).map_err(value_err)?);
        let inner = GroupElement::parse(&spec, text).map_err(value_err)?;
        Ok(PyValue { spec, inner })
    }

    fn is_finite(&self) -> bool {
        self.inner.is_finite()
    }

    fn __add__(&self, o: &PyValue) -> PyValue {
        PyValue { spec: self.spec.clone(), inner: &self.inner + &o.inner }
    }

    fn __sub__(&self, o: &PyValue) -> PyResult<PyValue> {
        let inner = self.inner.checked_sub(&o.inner).map_err(|e| PyArithmeticError::new_err(e.to_string()))?;
        Ok(PyValue { spec: self.spec.clone(), inner })
    }

    fn __richcmp__(&self, o: &PyValue, op: CompareOp) -> bool {
        op.matches(self.inner.cmp(&o.inner))
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Value('{}')", self.inner)
    }
}

/// A loaded problem spec.
#[pyclass(name = "Problem", frozen)]
struct PyProblem {
    spec: ProblemSpec,
}

#[pymethods]
impl PyProblem {
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(PyProblem { spec: ProblemSpec::from_toml(text).map_err(value_err)? })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyProblem { spec: ProblemSpec::load(Path::new(path)).map_err(value_err)? })
    }

    #[getter]
    fn name(&self) -> Option<String> {
        self.spec.name.clone()
    }

    /// Runs the construction; `branch` is `first`, `enumerate` or `select`.
    #[pyo3(signature = (max_iter = None, threshold = None, branch = None, depth = None))]
    fn run(
        &self,
        py: Python<'_>,
        max_iter: Option<usize>,
        threshold: Option<String>,
        branch: Option<&str>,
        depth: Option<usize>,
    ) -> PyResult<PyTrace> {
        let branch = match branch {
            None => None,
            Some("first") => Some(BranchKind::First),
            Some("enumerate") => Some(BranchKind::Enumerate),
            Some("select") => Some(BranchKind::Select),
            Some(b) => return Err(value_err(format!("unknown branch policy {b:?}"))),
        };
        let ov = Overrides { max_iter, threshold, branch, depth };
        let p: CoreProblem = self.spec.resolve(&ov).map_err(value_err)?;
        let trace = py
            .detach(|| run(&p.base, &p.f, &p.options))
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        let opts = ReportOptions { zvar: p.zvar.clone(), declared_unique: p.options.declared_unique };
        Ok(PyTrace { trace: Arc::new(trace), opts })
    }
}

/// The outcome of a run, or one branch of it.
#[pyclass(name = "Trace", frozen)]
struct PyTrace {
    trace: Arc<AlgorithmTrace>,
    opts: ReportOptions,
}

impl PyTrace {
    fn value(&self, g: &GroupElement) -> PyValue {
        PyValue { spec: self.trace.chain.base().spec().clone(), inner: g.clone() }
    }
}

#[pymethods]
impl PyTrace {
    #[getter]
    fn verdict(&self) -> &'static str {
        self.trace.verdict.name()
    }

    #[getter]
    fn exit_code(&self) -> i32 {
        exit_code(&self.trace.verdict)
    }

    /// μ₁, μ₂, … of the key chain.
    #[getter]
    fn values(&self) -> Vec<PyValue> {
        self.trace.mus().iter().map(|g| self.value(g)).collect()
    }

    #[getter]
    fn keys(&self) -> Vec<String> {
        let names = self.trace.chain.base().names();
        self.trace.chain.nodes().iter().map(|n| n.phi.fmt_with(names, &self.opts.zvar)).collect()
    }

    #[getter]
    fn orders(&self) -> Vec<u64> {
        self.trace.orders()
    }

    #[getter]
    fn path(&self) -> Vec<[usize; 2]> {
        self.trace.path.clone()
    }

    #[getter]
    fn invariants<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let inv = &self.trace.invariants;
        let d = PyDict::new(py);
        d.set_item("deg_f", inv.deg_f)?;
        d.set_item("e", inv.e)?;
        d.set_item("f", inv.residue_degree)?;
        d.set_item("s_tot", inv.s_tot.to_string())?;
        d.set_item("delta", inv.delta.as_ref().map(|r| r.to_string()))?;
        d.set_item("defect_suspected", inv.defect_suspected)?;
        Ok(d)
    }

    fn leaves(&self) -> Vec<PyTrace> {
        self.trace
            .leaves()
            .into_iter()
            .map(|l| PyTrace { trace: Arc::new(l.clone()), opts: self.opts.clone() })
            .collect()
    }

    /// Relations of the graded presentation, as text.
    #[pyo3(signature = (reduced = true))]
    fn relations(&self, reduced: bool) -> Vec<String> {
        let p = presentation(&self.trace);
        let p = if reduced { p.reduced() } else { p };
        let names = self.trace.chain.base().names();
        p.relations.iter().map(|r| r.text(names)).collect()
    }

    fn to_json(&self) -> PyResult<String> {
        to_json(&self.trace, &self.opts).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn text(&self) -> String {
        text_report(&self.trace, &self.opts)
    }

    fn svg(&self) -> String {
        svg_bundle(&self.trace)
    }

    fn __repr__(&self) -> String {
        format!("Trace(verdict='{}', steps={})", self.verdict(), self.trace.steps.len())
    }
}

/// Lower-hull segments `(x_lo, x_hi, slope)` of the points `(m − i, values[i])`.
#[pyfunction]
fn newton_polygon(values: Vec<PyValue>) -> PyResult<Vec<(i64, i64, PyValue)>> {
    let Some(first) = values.first() else {
        return Ok(vec![]);
    };
    let spec = first.spec.clone();
    let vals: Vec<GroupElement> = values.iter().map(|v| v.inner.clone()).collect();
    let np = NewtonPolygon::from_values(&vals);
    Ok(np
        .segments
        .iter()
        .map(|s| (s.lo.x, s.hi.x, PyValue { spec: spec.clone(), inner: s.slope.clone() }))
        .collect())
}

#[pymodule]
fn keypoly(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyValue>()?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PyTrace>()?;
    m.add_function(wrap_pyfunction!(newton_polygon, m)?)?;
    Ok(())
}
