//! Python bindings for `p4typed`.
//!
//! Types and terms are wrapped as opaque objects with a textual form.
//! Entities, P4Info documents and run results cross the boundary as JSON
//! strings.

use std::collections::BTreeMap;
use std::path::Path;

use p4typed::alpha_eq;
use p4typed::encoding::{emit_type_decls, load_p4info, EncodeOptions, ServerConfig};
use p4typed::network::RunOptions;
use p4typed::scenario::{load_scenario, ClientScope};
use p4typed::server::{conforms, entities_from_json, entities_to_json, eval_read, Entity, ServerState};
use p4typed::syntax::{print_term, print_type};
use p4typed::typing::{self, TypingEnv, DEFAULT_FUEL};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(p4typed_py, ParseError, PyException);
create_exception!(p4typed_py, TypeCheckError, PyException);

fn parse_err(e: impl std::fmt::Display) -> PyErr {
    ParseError::new_err(e.to_string())
}

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A type of the calculus.
#[pyclass(name = "Type", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyType(p4typed::Type);

#[pymethods]
impl PyType {
    #[staticmethod]
    fn parse(src: &str) -> PyResult<Self> {
        parse_type(src)
    }

    fn __str__(&self) -> String {
        print_type(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("Type({:?})", print_type(&self.0))
    }

    /// Equality up to renaming of bound variables.
    fn __eq__(&self, other: &Self) -> bool {
        alpha_eq(&self.0, &other.0)
    }

    fn to_json(&self) -> String {
        p4typed::json::type_to_json(&self.0).to_string()
    }
}

/// A term of the calculus.
#[pyclass(name = "Term", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTerm(p4typed::Term);

#[pymethods]
impl PyTerm {
    #[staticmethod]
    fn parse(src: &str) -> PyResult<Self> {
        parse_term(src)
    }

    fn __str__(&self) -> String {
        print_term(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("Term({:?})", print_term(&self.0))
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn is_value(&self) -> bool {
        self.0.is_value()
    }
}

/// A server configuration read from a P4Info document.
#[pyclass(name = "Config", frozen)]
struct PyConfig(ServerConfig);

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (p4info_json, action_wildcards = false))]
    fn new(p4info_json: &str, action_wildcards: bool) -> PyResult<Self> {
        let c = load_p4info(p4info_json).map_err(value_err)?;
        Ok(PyConfig(c.with_options(EncodeOptions { action_wildcards })))
    }

    fn tables(&self) -> Vec<String> {
        self.0.table_matches.keys().cloned().collect()
    }

    fn actions(&self, table: &str) -> Vec<String> {
        self.0.table_actions.get(table).cloned().unwrap_or_default()
    }

    /// Type declarations `<prefix>_TM`, `<prefix>_TA` and `<prefix>_TP`.
    #[pyo3(signature = (prefix = "config"))]
    fn type_decls(&self, prefix: &str) -> String {
        emit_type_decls(&self.0, prefix)
    }
}

#[pyfunction]
fn parse_type(src: &str) -> PyResult<PyType> {
    p4typed::syntax::parse_type(src).map(PyType).map_err(parse_err)
}

#[pyfunction]
fn parse_term(src: &str) -> PyResult<PyTerm> {
    p4typed::syntax::parse_term(src).map(PyTerm).map_err(parse_err)
}

/// Typecheck a program, optionally against named server configurations.
///
/// `servers` maps an address name to a P4Info file path; the program sees the
/// address variable and the `<name>_TM/_TA/_TP` declarations.
#[pyfunction]
#[pyo3(signature = (src, servers = None, action_wildcards = false, fuel = DEFAULT_FUEL))]
fn typecheck(
    src: &str,
    servers: Option<BTreeMap<String, String>>,
    action_wildcards: bool,
    fuel: usize,
) -> PyResult<PyType> {
    let mut scope = ClientScope::default();
    for (name, path) in servers.unwrap_or_default() {
        let text = std::fs::read_to_string(&path).map_err(|e| value_err(format!("{path}: {e}")))?;
        let cfg = load_p4info(&text).map_err(value_err)?.with_options(EncodeOptions { action_wildcards });
        scope.add_server(&ServerState::new(name, cfg));
    }
    let term = scope.parse("<input>", src).map_err(parse_err)?;
    typing::typecheck_with_fuel(&scope.env(), &term, fuel).map(PyType).map_err(|e| TypeCheckError::new_err(e.to_string()))
}

#[pyfunction]
#[pyo3(signature = (t, fuel = DEFAULT_FUEL))]
fn normalize(t: &PyType, fuel: usize) -> PyResult<PyType> {
    typing::normalize_type(&TypingEnv::new(), &t.0, fuel).map(PyType).map_err(|e| TypeCheckError::new_err(e.to_string()))
}

#[pyfunction]
fn subtype(s: &PyType, t: &PyType) -> bool {
    typing::subtype(&TypingEnv::new(), &s.0, &t.0)
}

#[pyfunction]
fn disjoint(s: &PyType, t: &PyType) -> bool {
    typing::disjoint(&TypingEnv::new(), &s.0, &t.0)
}

/// Whether a ground value term inhabits a type.
#[pyfunction]
fn member_of(v: &PyTerm, t: &PyType) -> PyResult<bool> {
    let g = v.0.as_ground().ok_or_else(|| value_err("not a ground value"))?;
    Ok(typing::member_of(&g, &t.0))
}

/// Declarations for a P4Info document, as source text.
#[pyfunction]
#[pyo3(signature = (p4info_json, prefix = "config", action_wildcards = false))]
fn encode_p4info(p4info_json: &str, prefix: &str, action_wildcards: bool) -> PyResult<String> {
    Ok(PyConfig::new(p4info_json, action_wildcards)?.type_decls(prefix))
}

fn entity(json: &str) -> PyResult<Entity> {
    let j: serde_json::Value = serde_json::from_str(json).map_err(value_err)?;
    Entity::from_json(&j).map_err(value_err)
}

/// Whether an entity (JSON) is admitted by a configuration.
#[pyfunction]
fn entity_conforms(config: &PyConfig, entity_json: &str) -> PyResult<bool> {
    Ok(conforms(&entity(entity_json)?, &config.0))
}

/// Entities (JSON list) matched by a read query (JSON entity).
#[pyfunction]
fn read_entities(config: &PyConfig, entities_json: &str, query_json: &str) -> PyResult<String> {
    let j: serde_json::Value = serde_json::from_str(entities_json).map_err(value_err)?;
    let es = entities_from_json(&j).map_err(value_err)?;
    let q = entity(query_json)?;
    Ok(entities_to_json(&eval_read(&config.0, &es, &q)).to_string())
}

/// Diagnostics for a scenario file; empty when the network is well typed.
#[pyfunction]
fn check_network(path: &str) -> PyResult<Vec<String>> {
    Ok(load_scenario(Path::new(path)).map_err(value_err)?.diagnostics())
}

/// Run a scenario and return the JSON trace and final state.
#[pyfunction]
#[pyo3(signature = (path, fuel = 10_000, check_invariants = false))]
fn run_scenario(path: &str, fuel: usize, check_invariants: bool) -> PyResult<String> {
    let net = load_scenario(Path::new(path)).map_err(value_err)?;
    Ok(net.run(RunOptions { fuel, check_invariants }).to_json().to_string())
}

#[pymodule]
fn p4typed_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ParseError", m.py().get_type::<ParseError>())?;
    m.add("TypeCheckError", m.py().get_type::<TypeCheckError>())?;
    m.add_class::<PyType>()?;
    m.add_class::<PyTerm>()?;
    m.add_class::<PyConfig>()?;
    m.add_function(wrap_pyfunction!(parse_type, m)?)?;
    m.add_function(wrap_pyfunction!(parse_term, m)?)?;
    m.add_function(wrap_pyfunction!(typecheck, m)?)?;
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(subtype, m)?)?;
    m.add_function(wrap_pyfunction!(disjoint, m)?)?;
    m.add_function(wrap_pyfunction!(member_of, m)?)?;
    m.add_function(wrap_pyfunction!(encode_p4info, m)?)?;
    m.add_function(wrap_pyfunction!(entity_conforms, m)?)?;
    m.add_function(wrap_pyfunction!(read_entities, m)?)?;
    m.add_function(wrap_pyfunction!(check_network, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
