//! Python bindings: scenarios, metrics, the property checker, and
//! placement, driven in-process from Python.

use std::path::{Path, PathBuf};

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use healfab::analysis;
use healfab::campaign::run_scenario_report;
use healfab::checker;
use healfab::config::Scenario as CoreScenario;
use healfab::netlist::parse_netlist;
use healfab::trace::Trace;

fn value_err(message: impl ToString) -> PyErr {
    PyValueError::new_err(message.to_string())
}

/// A loaded simulation scenario.
#[pyclass]
struct Scenario {
    inner: CoreScenario,
}

#[pymethods]
impl Scenario {
    #[new]
    fn new(path: PathBuf) -> PyResult<Self> {
        let inner = CoreScenario::load(&path).map_err(value_err)?;
        Ok(Scenario { inner })
    }

    #[getter]
    fn id(&self) -> String {
        self.inner.id.clone()
    }

    #[getter]
    fn digest(&self) -> String {
        self.inner.digest.clone()
    }

    #[getter]
    fn until_ns(&self) -> u64 {
        self.inner.until_ns
    }

    /// Run with the fault schedule; returns the trace as CSV text.
    fn run(&self) -> PyResult<String> {
        let sim = self.inner.run().map_err(value_err)?;
        Ok(sim.trace.to_csv())
    }

    /// Run the fault-free reference; returns the trace as CSV text.
    fn golden(&self) -> PyResult<String> {
        let sim = self.inner.golden().map_err(value_err)?;
        Ok(sim.trace.to_csv())
    }

    /// Run against the golden twin and reduce to a report dict.
    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
        use pyo3::types::PyDict;
        let report = run_scenario_report(&self.inner).map_err(value_err)?;
        let dict = PyDict::new(py);
        dict.set_item("scenario", &report.id)?;
        dict.set_item("injected", report.injected)?;
        dict.set_item("masked", report.masked)?;
        dict.set_item("healed", report.healed)?;
        dict.set_item("unhealed", report.unhealed)?;
        dict.set_item("heal_latencies_ns", &report.heal_latencies_ns)?;
        dict.set_item("golden_equivalent", report.golden_equivalent)?;
        Ok(dict)
    }

    fn __repr__(&self) -> String {
        format!("Scenario(id={:?}, until_ns={})", self.inner.id, self.inner.until_ns)
    }
}

/// Four-architecture comparison rows at array width `n` under `spf`
/// assumed permanent faults. Each row is (name, functional, spares,
/// routing, coverage, overhead_percent) with exact-rational rendering.
#[pyfunction]
fn metrics_table(n: u64, spf: u64) -> PyResult<Vec<(String, String, String, String, String, String)>> {
    let rows = analysis::architecture_table(n, spf).map_err(value_err)?;
    Ok(rows
        .into_iter()
        .map(|r| {
            (
                r.name.to_string(),
                analysis::render_exact(r.functional),
                analysis::render_exact(r.spares),
                analysis::render_exact(r.routing),
                analysis::render_exact(r.coverage),
                analysis::render_exact(r.overhead_percent),
            )
        })
        .collect())
}

/// Self-healing capacity coverage min(scs/spf, 1), rendered exactly.
#[pyfunction]
fn coverage(scs: u64, spf: u64) -> PyResult<String> {
    let c = analysis::coverage(analysis::Exact::from_integer(scs), spf).map_err(value_err)?;
    Ok(analysis::render_exact(c))
}

/// Area overhead percent (spares + routing) / functional * 100.
#[pyfunction]
fn area_overhead(spares: u64, routing: u64, functional: u64) -> PyResult<String> {
    let v = analysis::area_overhead(
        analysis::Exact::from_integer(spares),
        analysis::Exact::from_integer(routing),
        analysis::Exact::from_integer(functional),
    )
    .map_err(value_err)?;
    Ok(analysis::render_exact(v))
}

/// Evaluate a property (text) against a trace CSV (text), with an
/// optional golden trace for golden(sig) comparisons. Returns "HOLDS",
/// "VIOLATED(t)", or "INCONCLUSIVE".
#[pyfunction]
#[pyo3(signature = (trace_csv, prop, golden_csv=None))]
fn check_property(trace_csv: &str, prop: &str, golden_csv: Option<&str>) -> PyResult<String> {
    let trace = Trace::from_csv(trace_csv).map_err(value_err)?;
    let golden = golden_csv
        .map(Trace::from_csv)
        .transpose()
        .map_err(value_err)?;
    let verdict = checker::check_property(&trace, golden.as_ref(), prop).map_err(value_err)?;
    Ok(verdict.to_string())
}

/// Per-fault recovery measurements from a trace CSV: (target,
/// injected_ns, healed_ns or None).
#[pyfunction]
fn recovery_latency(trace_csv: &str) -> PyResult<Vec<(String, u64, Option<u64>)>> {
    let trace = Trace::from_csv(trace_csv).map_err(value_err)?;
    Ok(analysis::recovery_latency(&trace)
        .into_iter()
        .map(|r| (r.target, r.injected_ns, r.healed_ns))
        .collect())
}

/// Parse a netlist file and return its placement rendering.
#[pyfunction]
fn place_netlist(path: PathBuf, layers: u8) -> PyResult<String> {
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| value_err(format!("cannot read {}: {e}", path.display())))?;
    let netlist = parse_netlist(&text).map_err(|errors| {
        value_err(
            errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "),
        )
    })?;
    let mapping = healfab::place(&netlist, layers).map_err(value_err)?;
    Ok(mapping.to_text(&netlist))
}

#[pymodule]
fn healfab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Scenario>()?;
    m.add_function(wrap_pyfunction!(metrics_table, m)?)?;
    m.add_function(wrap_pyfunction!(coverage, m)?)?;
    m.add_function(wrap_pyfunction!(area_overhead, m)?)?;
    m.add_function(wrap_pyfunction!(check_property, m)?)?;
    m.add_function(wrap_pyfunction!(recovery_latency, m)?)?;
    m.add_function(wrap_pyfunction!(place_netlist, m)?)?;
    Ok(())
}
