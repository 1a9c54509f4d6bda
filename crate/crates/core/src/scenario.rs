//! Scenario files describing servers and client programs, in TOML or JSON.
//!
//! Client programs see each server address as a variable of the same name
//! and the type declarations `<address>_TM`, `_TA`, `_TP`, `_Ref`, `_Chan`.

use std::fs;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::Deserialize;
use thiserror::Error;

use crate::ast::{GroundValue, Name, Term, Type};
use crate::encoding::{load_p4info, type_decls, ConfigError, EncodeOptions, ServerConfig};
use crate::network::Network;
use crate::server::{entities_from_json, EntityError, ServerState};
use crate::subst::subst_term;
use crate::syntax::{parse_program_with, ParseError};
use crate::typing::TypingEnv;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default)]
    pub servers: Vec<ServerSpec>,
    #[serde(default)]
    pub clients: Vec<ClientSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerSpec {
    pub p4info: String,
    pub address: String,
    #[serde(default)]
    pub entities: Option<String>,
    #[serde(default)]
    pub action_wildcards: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClientSpec {
    #[serde(default)]
    pub id: Option<String>,
    /// Path of a program file.
    #[serde(default)]
    pub program: Option<String>,
    /// Inline program text.
    #[serde(default)]
    pub source: Option<String>,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Config { path: PathBuf, source: ConfigError },
    #[error("{path}: {source}")]
    Entities { path: PathBuf, source: EntityError },
    #[error("{origin}:{source}")]
    Syntax { origin: String, source: ParseError },
    #[error("client {0} has neither `program` nor `source`, or both")]
    ClientSource(String),
}

fn read(path: &Path) -> Result<String, ScenarioError> {
    fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })
}

pub fn parse_spec(text: &str, path: &Path) -> Result<ScenarioSpec, ScenarioError> {
    let fmt_err = |message: String| ScenarioError::Format { path: path.to_path_buf(), message };
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(text).map_err(|e| fmt_err(e.to_string()))
    } else {
        toml::from_str(text).map_err(|e| fmt_err(e.to_string()))
    }
}

pub fn load_config(path: &Path, options: EncodeOptions) -> Result<ServerConfig, ScenarioError> {
    let text = read(path)?;
    let c = load_p4info(&text).map_err(|source| ScenarioError::Config { path: path.to_path_buf(), source })?;
    Ok(c.with_options(options))
}

/// Type declarations and address bindings that client programs see.
#[derive(Debug, Clone, Default)]
pub struct ClientScope {
    pub decls: IndexMap<Name, Type>,
    pub addresses: Vec<(Name, Term)>,
}

impl ClientScope {
    pub fn from_servers(servers: &[ServerState]) -> Self {
        let mut scope = ClientScope::default();
        for s in servers {
            scope.add_server(s);
        }
        scope
    }

    pub fn add_server(&mut self, s: &ServerState) {
        scope_decls(&mut self.decls, s.name(), &s.config);
        self.addresses.push((s.name().to_string(), Term::Lit(s.address.clone())));
    }

    /// A typing environment binding every address name to its reference type.
    pub fn env(&self) -> TypingEnv {
        let mut env = TypingEnv::new();
        for (name, addr) in &self.addresses {
            if let Term::Lit(GroundValue::Addr { sig, .. }) = addr {
                env.push_term(name.clone(), Type::server_ref((**sig).clone()));
            }
        }
        env
    }

    pub fn parse(&self, origin: &str, src: &str) -> Result<Term, ScenarioError> {
        let prog = parse_program_with(&self.decls, src)
            .map_err(|source| ScenarioError::Syntax { origin: origin.to_string(), source })?;
        prog.term.ok_or_else(|| ScenarioError::Syntax {
            origin: origin.to_string(),
            source: ParseError { line: 1, col: 1, message: "program has no term".into() },
        })
    }

    /// Replace free address variables by the address values.
    pub fn bind(&self, t: &Term) -> Term {
        let free = t.free_vars();
        self.addresses
            .iter()
            .filter(|(n, _)| free.contains(n))
            .fold(t.clone(), |acc, (n, v)| subst_term(&acc, n, v))
    }
}

fn scope_decls(decls: &mut IndexMap<Name, Type>, prefix: &str, c: &ServerConfig) {
    decls.extend(type_decls(c, prefix));
}

pub fn build_network(spec: &ScenarioSpec, base: &Path) -> Result<Network, ScenarioError> {
    let mut servers = Vec::new();
    for s in &spec.servers {
        let cfg = load_config(&base.join(&s.p4info), EncodeOptions { action_wildcards: s.action_wildcards })?;
        let mut state = ServerState::new(s.address.clone(), cfg);
        if let Some(p) = &s.entities {
            let path = base.join(p);
            let text = read(&path)?;
            let j: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| ScenarioError::Format { path: path.clone(), message: e.to_string() })?;
            state.entities = entities_from_json(&j).map_err(|source| ScenarioError::Entities { path, source })?;
        }
        servers.push(state);
    }
    let scope = ClientScope::from_servers(&servers);
    let mut clients = Vec::new();
    for (i, c) in spec.clients.iter().enumerate() {
        let id = c.id.clone().unwrap_or_else(|| format!("c{}", i + 1));
        let (origin, src) = match (&c.program, &c.source) {
            (Some(p), None) => {
                let path = base.join(p);
                (path.display().to_string(), read(&path)?)
            }
            (None, Some(s)) => (format!("client {id}"), s.clone()),
            _ => return Err(ScenarioError::ClientSource(id)),
        };
        let term = scope.parse(&origin, &src)?;
        clients.push((id, scope.bind(&term)));
    }
    Ok(Network::new(clients, servers))
}

pub fn load_scenario(path: &Path) -> Result<Network, ScenarioError> {
    let text = read(path)?;
    let spec = parse_spec(&text, path)?;
    build_network(&spec, path.parent().unwrap_or(Path::new(".")))
}
