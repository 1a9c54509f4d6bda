//! P4Runtime servers: entities, conformance, read filtering, writes and the
//! server transition function.

use std::collections::BTreeSet;

use serde_json::{json, Value};
use thiserror::Error;

use crate::ast::{sugar, ChanSig, ChannelId, GroundValue, OpKind, Type, WILDCARD};
use crate::encoding::{encode_config, ServerConfig};
use crate::json::{ground_from_json, ground_to_json, JsonError};
use crate::typing::{Checker, TypingEnv};

/// A table entry, possibly with wildcards when used as a query.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Entity {
    pub table_name: String,
    pub field_matches: GroundValue,
    pub action_name: String,
    pub action_args: GroundValue,
    /// `None` is the wildcard priority.
    pub priority: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EntityError {
    #[error("entity is not a record")]
    NotRecord,
    #[error("entity field `{0}` is missing or has the wrong shape")]
    BadField(&'static str),
    #[error(transparent)]
    Json(#[from] JsonError),
}

fn is_wild(v: &GroundValue) -> bool {
    v.is_wildcard()
}

impl Entity {
    pub fn new(table: impl Into<String>, matches: GroundValue, action: impl Into<String>, args: GroundValue) -> Self {
        Entity {
            table_name: table.into(),
            field_matches: matches,
            action_name: action.into(),
            action_args: args,
            priority: None,
        }
    }

    pub fn with_priority(mut self, p: i64) -> Self {
        self.priority = Some(p);
        self
    }

    /// The record `{name, matches, action, params[, priority]}`.
    pub fn to_value(&self) -> GroundValue {
        let mut fs = vec![
            ("name".to_string(), GroundValue::str(&self.table_name)),
            ("matches".to_string(), self.field_matches.clone()),
            ("action".to_string(), GroundValue::str(&self.action_name)),
            ("params".to_string(), self.action_args.clone()),
        ];
        if let Some(p) = self.priority {
            fs.push(("priority".to_string(), GroundValue::Int(p)));
        }
        GroundValue::Record(fs)
    }

    pub fn from_value(v: &GroundValue) -> Result<Entity, EntityError> {
        if !matches!(v, GroundValue::Record(_)) {
            return Err(EntityError::NotRecord);
        }
        let string = |l: &'static str| match v.field(l) {
            Some(GroundValue::Str(s)) => Ok(s.clone()),
            _ => Err(EntityError::BadField(l)),
        };
        let priority = match v.field("priority") {
            None => None,
            Some(GroundValue::Int(n)) => Some(*n),
            Some(p) if is_wild(p) => None,
            Some(_) => return Err(EntityError::BadField("priority")),
        };
        Ok(Entity {
            table_name: string("name")?,
            field_matches: v.field("matches").cloned().ok_or(EntityError::BadField("matches"))?,
            action_name: string("action")?,
            action_args: v.field("params").cloned().ok_or(EntityError::BadField("params"))?,
            priority,
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "table_name": self.table_name,
            "field_matches": ground_to_json(&self.field_matches),
            "action_name": self.action_name,
            "action_args": ground_to_json(&self.action_args),
            "priority": self.priority,
        })
    }

    pub fn from_json(j: &Value) -> Result<Entity, EntityError> {
        let s = |k: &'static str| j.get(k).and_then(Value::as_str).map(str::to_string).ok_or(EntityError::BadField(k));
        let g = |k: &'static str| -> Result<GroundValue, EntityError> {
            Ok(ground_from_json(j.get(k).unwrap_or(&Value::Null))?)
        };
        let priority = match j.get("priority") {
            None | Some(Value::Null) => None,
            Some(Value::String(w)) if w == WILDCARD => None,
            Some(p) => Some(p.as_i64().ok_or(EntityError::BadField("priority"))?),
        };
        Ok(Entity {
            table_name: s("table_name")?,
            field_matches: g("field_matches")?,
            action_name: s("action_name")?,
            action_args: g("action_args")?,
            priority,
        })
    }

    /// Whether the table, matches or action is the wildcard.
    pub fn has_wildcard(&self) -> bool {
        self.table_name == WILDCARD || is_wild(&self.field_matches) || self.action_name == WILDCARD
    }

    fn same_key(&self, other: &Entity) -> bool {
        self.table_name == other.table_name
            && self.field_matches.sem_eq(&other.field_matches)
            && self.priority == other.priority
    }
}

pub fn entities_to_json(es: &[Entity]) -> Value {
    Value::Array(es.iter().map(Entity::to_json).collect())
}

pub fn entities_from_json(j: &Value) -> Result<Vec<Entity>, EntityError> {
    j.as_array().ok_or(EntityError::NotRecord)?.iter().map(Entity::from_json).collect()
}

/// Whether the entity value belongs to the table-entry type of the encoded
/// configuration, instantiated with its own table and action names.
pub fn conforms(e: &Entity, c: &ServerConfig) -> bool {
    conforms_sig(&e.to_value(), &encode_config(c))
}

pub fn conforms_sig(v: &GroundValue, sig: &ChanSig) -> bool {
    let (name, action) = match (v.field("name"), v.field("action")) {
        (Some(n), Some(a)) => (n.clone(), a.clone()),
        _ => return false,
    };
    let checker = Checker::default();
    let env = TypingEnv::new();
    let inst = sugar::p4entity(
        sig.tm.clone(),
        sig.ta.clone(),
        sig.tp.clone(),
        Type::singleton(name),
        Type::singleton(action),
    );
    let inst = checker.normalize(&env, &inst);
    !matches!(inst, Type::App(..)) && checker.member_of(&env, v, &inst)
}

/// Successive filtering by table, matches, action and priority.
pub fn eval_read(_c: &ServerConfig, es: &[Entity], q: &Entity) -> Vec<Entity> {
    let mut out: Vec<&Entity> = es.iter().collect();
    if q.table_name != WILDCARD {
        out.retain(|e| e.table_name == q.table_name);
    }
    if !is_wild(&q.field_matches) {
        out.retain(|e| e.field_matches.sem_eq(&q.field_matches));
    }
    if q.action_name != WILDCARD {
        out.retain(|e| e.action_name == q.action_name);
    }
    if let Some(p) = q.priority {
        out.retain(|e| e.priority == Some(p));
    }
    out.into_iter().cloned().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WriteKind {
    Insert,
    Modify,
    Delete,
}

impl WriteKind {
    pub fn from_op(k: OpKind) -> Option<WriteKind> {
        match k {
            OpKind::Insert => Some(WriteKind::Insert),
            OpKind::Modify => Some(WriteKind::Modify),
            OpKind::Delete => Some(WriteKind::Delete),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WriteError {
    #[error("wildcards are not allowed in {0:?} requests")]
    WildcardInWrite(WriteKind),
}

/// Apply a write, returning the new entity list and whether it had an effect.
pub fn eval_write(_c: &ServerConfig, es: &[Entity], kind: WriteKind, e: &Entity) -> Result<(Vec<Entity>, bool), WriteError> {
    match kind {
        WriteKind::Insert | WriteKind::Modify if e.has_wildcard() => Err(WriteError::WildcardInWrite(kind)),
        WriteKind::Insert => {
            if es.iter().any(|x| x.same_key(e)) {
                Ok((es.to_vec(), false))
            } else {
                let mut out = es.to_vec();
                out.push(e.clone());
                Ok((out, true))
            }
        }
        WriteKind::Modify => {
            let mut out = es.to_vec();
            match out.iter_mut().find(|x| x.same_key(e)) {
                Some(x) => {
                    x.action_name = e.action_name.clone();
                    x.action_args = e.action_args.clone();
                    Ok((out, true))
                }
                None => Ok((out, false)),
            }
        }
        WriteKind::Delete => {
            let hit = |x: &Entity| {
                (e.table_name == WILDCARD || x.table_name == e.table_name)
                    && (is_wild(&e.field_matches) || x.field_matches.sem_eq(&e.field_matches))
                    && (e.priority.is_none() || x.priority == e.priority)
            };
            let out: Vec<Entity> = es.iter().filter(|x| !hit(x)).cloned().collect();
            let changed = out.len() != es.len();
            Ok((out, changed))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Refusal {
    #[error("unknown channel {0}")]
    UnknownChannel(String),
    #[error("request not addressed to this server")]
    WrongAddress,
    #[error("nonconformant entity: {0}")]
    Nonconformant(String),
}

/// A server `<C, E, a, K>` plus the counter for fresh channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ServerState {
    pub config: ServerConfig,
    pub entities: Vec<Entity>,
    pub address: GroundValue,
    pub channels: BTreeSet<ChannelId>,
    next_channel: u64,
}

impl ServerState {
    pub fn new(name: impl Into<String>, config: ServerConfig) -> Self {
        let sig = encode_config(&config);
        ServerState {
            address: GroundValue::Addr { name: name.into(), sig: Box::new(sig) },
            config,
            entities: Vec::new(),
            channels: BTreeSet::new(),
            next_channel: 1,
        }
    }

    pub fn with_entities(mut self, es: Vec<Entity>) -> Self {
        self.entities = es;
        self
    }

    pub fn name(&self) -> &str {
        match &self.address {
            GroundValue::Addr { name, .. } => name,
            _ => "",
        }
    }

    pub fn sig(&self) -> &ChanSig {
        match &self.address {
            GroundValue::Addr { sig, .. } => sig,
            _ => unreachable!("server address is always an address value"),
        }
    }

    pub fn server_ref_type(&self) -> Type {
        Type::server_ref(self.sig().clone())
    }

    pub fn chan_type(&self) -> Type {
        Type::chan(self.sig().clone())
    }

    /// Every stored entity conforms and has no wildcard.
    pub fn well_formed(&self) -> bool {
        self.entities.iter().all(|e| !e.has_wildcard() && conforms(e, &self.config))
    }

    pub fn owns_channel(&self, v: &GroundValue) -> bool {
        matches!(v, GroundValue::Chan { id, .. } if self.channels.contains(id))
    }

    /// One server transition for a request, returning the response and the
    /// updated server.
    pub fn step(&self, kind: OpKind, target: &GroundValue, payload: Option<&GroundValue>) -> Result<(GroundValue, ServerState), Refusal> {
        let mut next = self.clone();
        if kind == OpKind::Connect {
            match target {
                GroundValue::Addr { name, .. } if name == self.name() => {}
                _ => return Err(Refusal::WrongAddress),
            }
            let id = ChannelId { server: self.name().to_string(), index: next.next_channel };
            next.next_channel += 1;
            next.channels.insert(id.clone());
            return Ok((GroundValue::Chan { id, sig: Box::new(self.sig().clone()) }, next));
        }
        match target {
            GroundValue::Chan { id, .. } if self.channels.contains(id) => {}
            GroundValue::Chan { id, .. } => return Err(Refusal::UnknownChannel(id.to_string())),
            _ => return Err(Refusal::UnknownChannel(crate::syntax::print_ground(target))),
        }
        let payload = payload.ok_or_else(|| Refusal::Nonconformant("missing entity".into()))?;
        if !conforms_sig(payload, self.sig()) {
            return Err(Refusal::Nonconformant(crate::syntax::print_ground(payload)));
        }
        let e = Entity::from_value(payload).map_err(|err| Refusal::Nonconformant(err.to_string()))?;
        match WriteKind::from_op(kind) {
            None => {
                let found = eval_read(&self.config, &self.entities, &e);
                Ok((GroundValue::list(found.iter().map(Entity::to_value)), next))
            }
            Some(w) => match eval_write(&self.config, &self.entities, w, &e) {
                Ok((es, changed)) => {
                    next.entities = es;
                    Ok((GroundValue::Bool(changed), next))
                }
                Err(WriteError::WildcardInWrite(_)) => Ok((GroundValue::Bool(false), next)),
            },
        }
    }
}
