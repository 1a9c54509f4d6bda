//! Networks of clients and servers, their well-typedness, and a
//! deterministic run loop.

use std::collections::BTreeSet;

use serde::Serialize;
use serde_json::{json, Value};

use crate::ast::{GroundValue, OpKind, Term, Type};
use crate::eval::{step, EvalError, Step};
use crate::json::ground_to_json;
use crate::server::{entities_to_json, ServerState};
use crate::syntax::{print_term, print_type};
use crate::typing::{Checker, TypingEnv};

#[derive(Debug, Clone, PartialEq)]
pub struct Client {
    pub id: String,
    pub term: Term,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Network {
    pub clients: Vec<Client>,
    pub servers: Vec<ServerState>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Label {
    Tau,
    Op { kind: OpKind, target: GroundValue, payload: Option<GroundValue>, response: GroundValue },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub step: usize,
    pub client: String,
    pub label: Label,
    pub server: Option<String>,
}

impl TraceEvent {
    pub fn to_json(&self) -> Value {
        let mut j = json!({ "step": self.step, "client": self.client, "server": self.server });
        match &self.label {
            Label::Tau => j["label"] = json!("tau"),
            Label::Op { kind, target, payload, response } => {
                j["label"] = json!(kind.label());
                j["target"] = ground_to_json(target);
                if let Some(p) = payload {
                    j["payload"] = ground_to_json(p);
                }
                j["response"] = ground_to_json(response);
            }
        }
        j
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RunStatus {
    Terminal,
    FuelExhausted,
    Deadlock { detail: String },
    Stuck { client: String, detail: String },
    PreservationViolation { client: String, before: String, after: String },
    OwnershipViolation { detail: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub network: Network,
    pub trace: Vec<TraceEvent>,
    pub status: RunStatus,
}

impl Run {
    pub fn is_terminal(&self) -> bool {
        self.status == RunStatus::Terminal
    }

    pub fn to_json(&self) -> Value {
        json!({
            "status": serde_json::to_value(&self.status).unwrap_or(Value::Null),
            "trace": self.trace.iter().map(TraceEvent::to_json).collect::<Vec<_>>(),
            "clients": self.network.clients.iter().map(|c| json!({"id": c.id, "term": print_term(&c.term)})).collect::<Vec<_>>(),
            "servers": self.network.servers.iter().map(|s| json!({
                "address": s.name(),
                "channels": s.channels.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "entities": entities_to_json(&s.entities),
            })).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub fuel: usize,
    pub check_invariants: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { fuel: 10_000, check_invariants: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepError {
    Deadlock(String),
    Stuck { client: String, error: EvalError },
}

impl Network {
    pub fn new(clients: Vec<(String, Term)>, servers: Vec<ServerState>) -> Self {
        Network { clients: clients.into_iter().map(|(id, term)| Client { id, term }).collect(), servers }
    }

    pub fn server(&self, name: &str) -> Option<&ServerState> {
        self.servers.iter().find(|s| s.name() == name)
    }

    pub fn is_terminal(&self) -> bool {
        self.clients.iter().all(|c| c.term.is_value())
    }

    /// Violations of network well-typedness; empty when well typed.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        let checker = Checker::default();
        let env = TypingEnv::new();
        let mut names = BTreeSet::new();
        let mut chans = BTreeSet::new();
        for s in &self.servers {
            if !names.insert(s.name().to_string()) {
                out.push(format!("address `{}` is used by more than one server", s.name()));
            }
            for c in &s.channels {
                if c.server != s.name() || !chans.insert(c.clone()) {
                    out.push(format!("channel {c} is not uniquely owned by server `{}`", s.name()));
                }
            }
            if !s.well_formed() {
                out.push(format!("server `{}` stores a nonconformant or wildcard entity", s.name()));
            }
        }
        for c in &self.clients {
            if let Err(e) = checker.typecheck(&env, &c.term) {
                out.push(format!("client `{}`: {e}", c.id));
            }
            out.extend(self.ref_diagnostics(c));
        }
        out
    }

    pub fn well_typed(&self) -> bool {
        self.diagnostics().is_empty()
    }

    fn ref_diagnostics(&self, c: &Client) -> Vec<String> {
        let mut refs = Vec::new();
        c.term.collect_refs(&mut refs);
        let mut out = Vec::new();
        for r in refs {
            match &r {
                GroundValue::Addr { name, sig } => {
                    let owners: Vec<&ServerState> = self.servers.iter().filter(|s| s.name() == name).collect();
                    match owners.as_slice() {
                        [s] if s.sig().alpha_eq(sig) => {}
                        [_] => out.push(format!("client `{}`: address `{name}` has the wrong type", c.id)),
                        _ => out.push(format!("client `{}`: address `{name}` has {} servers", c.id, owners.len())),
                    }
                }
                GroundValue::Chan { id, sig } => {
                    let owners: Vec<&ServerState> = self.servers.iter().filter(|s| s.channels.contains(id)).collect();
                    match owners.as_slice() {
                        [s] if s.sig().alpha_eq(sig) => {}
                        [_] => out.push(format!("client `{}`: channel {id} has the wrong type", c.id)),
                        _ => out.push(format!("client `{}`: channel {id} is owned by {} servers", c.id, owners.len())),
                    }
                }
                _ => {}
            }
        }
        out
    }

    fn owner_of(&self, kind: OpKind, target: &GroundValue) -> Option<usize> {
        self.servers.iter().position(|s| match kind {
            OpKind::Connect => matches!(target, GroundValue::Addr { name, .. } if name == s.name()),
            _ => s.owns_channel(target),
        })
    }

    /// One network transition by the first client able to move, or `None`
    /// when every client is a value.
    pub fn step(&self, index: usize) -> Result<Option<(TraceEvent, Network)>, StepError> {
        if self.is_terminal() {
            return Ok(None);
        }
        let mut blocked = Vec::new();
        for (ci, c) in self.clients.iter().enumerate() {
            let st = step(&c.term).map_err(|error| StepError::Stuck { client: c.id.clone(), error })?;
            match st {
                Step::Value => {}
                Step::Tau(t) => {
                    let mut next = self.clone();
                    next.clients[ci].term = t;
                    let ev = TraceEvent { step: index, client: c.id.clone(), label: Label::Tau, server: None };
                    return Ok(Some((ev, next)));
                }
                Step::Request(req) => {
                    let Some(si) = self.owner_of(req.kind, &req.target) else {
                        blocked.push(format!("client `{}` has no server for {}", c.id, req.kind.name()));
                        continue;
                    };
                    let server = &self.servers[si];
                    match server.step(req.kind, &req.target, req.payload.as_ref()) {
                        Ok((response, s2)) => {
                            let t = req.resume(&response).map_err(|error| StepError::Stuck { client: c.id.clone(), error })?;
                            let mut next = self.clone();
                            next.clients[ci].term = t;
                            next.servers[si] = s2;
                            let ev = TraceEvent {
                                step: index,
                                client: c.id.clone(),
                                label: Label::Op { kind: req.kind, target: req.target, payload: req.payload, response },
                                server: Some(server.name().to_string()),
                            };
                            return Ok(Some((ev, next)));
                        }
                        Err(refusal) => blocked.push(format!("client `{}`: server `{}` refused: {refusal}", c.id, server.name())),
                    }
                }
            }
        }
        Err(StepError::Deadlock(blocked.join("; ")))
    }

    /// Every channel held by a client belongs to exactly one server.
    pub fn ownership_violations(&self) -> Vec<String> {
        self.clients.iter().flat_map(|c| self.ref_diagnostics(c)).collect()
    }

    pub fn run(&self, opts: RunOptions) -> Run {
        let checker = Checker::default();
        let env = TypingEnv::new();
        let initial: Vec<Option<Type>> = if opts.check_invariants {
            self.clients.iter().map(|c| checker.typecheck(&env, &c.term).ok()).collect()
        } else {
            Vec::new()
        };
        let mut net = self.clone();
        let mut trace = Vec::new();
        let finish = |network: Network, trace: Vec<TraceEvent>, status: RunStatus| Run { network, trace, status };
        loop {
            if net.is_terminal() {
                return finish(net, trace, RunStatus::Terminal);
            }
            if trace.len() >= opts.fuel {
                return finish(net, trace, RunStatus::FuelExhausted);
            }
            match net.step(trace.len()) {
                Ok(Some((ev, next))) => {
                    if opts.check_invariants {
                        let ci = next.clients.iter().position(|c| c.id == ev.client).expect("stepped client exists");
                        if let Some(before) = &initial[ci] {
                            let after = checker.typecheck(&env, &next.clients[ci].term);
                            let ok = after.as_ref().is_ok_and(|a| checker.subtype(&env, a, before));
                            if !ok {
                                let after = match after {
                                    Ok(a) => print_type(&a),
                                    Err(e) => e.to_string(),
                                };
                                trace.push(ev);
                                let status = RunStatus::PreservationViolation {
                                    client: next.clients[ci].id.clone(),
                                    before: print_type(before),
                                    after,
                                };
                                return finish(next, trace, status);
                            }
                        }
                        let own = next.ownership_violations();
                        if !own.is_empty() {
                            trace.push(ev);
                            return finish(next, trace, RunStatus::OwnershipViolation { detail: own.join("; ") });
                        }
                    }
                    trace.push(ev);
                    net = next;
                }
                Ok(None) => return finish(net, trace, RunStatus::Terminal),
                Err(StepError::Deadlock(detail)) => return finish(net, trace, RunStatus::Deadlock { detail }),
                Err(StepError::Stuck { client, error }) => {
                    return finish(net, trace, RunStatus::Stuck { client, detail: error.to_string() })
                }
            }
        }
    }
}
