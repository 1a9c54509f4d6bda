//! Generators and reference oracles shared by the integration tests.
#![allow(dead_code)]

use std::fmt::Write as _;

use indexmap::IndexMap;
use p4typed::encoding::{ActionParam, EncodeOptions, MatchField, MatchKind, ServerConfig};
use p4typed::server::{Entity, ServerState};
use p4typed::{sugar, BaseType, GroundValue, MatchArm, OpKind, Term, Type, WILDCARD};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const KINDS: [MatchKind; 5] =
    [MatchKind::Exact, MatchKind::Ternary, MatchKind::Lpm, MatchKind::Range, MatchKind::Optional];

const PARAM_NAMES: [&str; 3] = ["port", "dstAddr", "vlan"];

pub fn gen_config(r: &mut ChaCha8Rng) -> ServerConfig {
    let mut c = ServerConfig::default();
    let n_actions = r.gen_range(1..=4);
    let mut actions = Vec::new();
    for i in 0..n_actions {
        let name = if i == 0 && r.gen_bool(0.5) { "NoAction".to_string() } else { format!("Ctl.act{i}") };
        let k = if name == "NoAction" { 0 } else { r.gen_range(0..=PARAM_NAMES.len()) };
        let params = PARAM_NAMES[..k]
            .iter()
            .map(|p| ActionParam { name: p.to_string(), bitwidth: r.gen_range(1..=48) })
            .collect();
        c.action_params.insert(name.clone(), params);
        actions.push(name);
    }
    for t in 0..r.gen_range(1..=3) {
        let fields = (0..r.gen_range(1..=3))
            .map(|j| MatchField { name: format!("hdr.f{j}"), kind: *KINDS.choose(r).unwrap() })
            .collect();
        let mut acts: Vec<String> = actions.iter().filter(|_| r.gen_bool(0.6)).cloned().collect();
        if acts.is_empty() {
            acts.push(actions.choose(r).unwrap().clone());
        }
        c.table_matches.insert(format!("Ctl.tbl{t}"), fields);
        c.table_actions.insert(format!("Ctl.tbl{t}"), acts);
    }
    c.with_options(EncodeOptions { action_wildcards: r.gen_bool(0.5) })
}

pub fn bytes(r: &mut ChaCha8Rng) -> GroundValue {
    let n = r.gen_range(1..=4);
    GroundValue::Bytes((0..n).map(|_| r.gen_range(0..4u8)).collect())
}

fn kind_record(r: &mut ChaCha8Rng, kind: MatchKind) -> GroundValue {
    let mut fs = vec![];
    match kind {
        MatchKind::Exact | MatchKind::Optional => fs.push(("value", bytes(r))),
        MatchKind::Ternary => {
            fs.push(("value", bytes(r)));
            fs.push(("mask", bytes(r)));
        }
        MatchKind::Lpm => {
            fs.push(("value", bytes(r)));
            fs.push(("prefixLen", GroundValue::Int(r.gen_range(0..=32))));
        }
        MatchKind::Range => {
            fs.push(("low", bytes(r)));
            fs.push(("high", bytes(r)));
        }
    }
    GroundValue::record(fs)
}

pub fn match_value(r: &mut ChaCha8Rng, kind: MatchKind) -> GroundValue {
    if kind == MatchKind::Exact {
        kind_record(r, kind)
    } else if r.gen_bool(0.8) {
        GroundValue::record([("some", kind_record(r, kind))])
    } else {
        GroundValue::record([("none", GroundValue::Unit)])
    }
}

pub fn valid_matches(r: &mut ChaCha8Rng, fields: &[MatchField]) -> GroundValue {
    GroundValue::Record(fields.iter().map(|f| (f.name.clone(), match_value(r, f.kind))).collect())
}

pub fn valid_params(r: &mut ChaCha8Rng, params: &[ActionParam]) -> GroundValue {
    if params.is_empty() {
        GroundValue::Unit
    } else {
        GroundValue::Record(params.iter().map(|p| (p.name.clone(), bytes(r))).collect())
    }
}

/// A wildcard-free entity conforming to `c`.
pub fn valid_entity(r: &mut ChaCha8Rng, c: &ServerConfig) -> Entity {
    let (table, fields) = c.table_matches.iter().nth(r.gen_range(0..c.table_matches.len())).unwrap();
    let action = c.table_actions[table].choose(r).unwrap().clone();
    let matches = valid_matches(r, fields);
    let params = valid_params(r, &c.action_params[&action]);
    Entity::new(table.clone(), matches, action, params)
}

fn any_atom(r: &mut ChaCha8Rng) -> GroundValue {
    match r.gen_range(0..5) {
        0 => GroundValue::Int(r.gen_range(0..4)),
        1 => GroundValue::str("x"),
        2 => GroundValue::Unit,
        3 => GroundValue::Bool(true),
        _ => bytes(r),
    }
}

fn set_field(v: &mut GroundValue, label: &str, x: Option<GroundValue>) {
    if let GroundValue::Record(fs) = v {
        match (fs.iter().position(|(l, _)| l == label), x) {
            (Some(i), Some(x)) => fs[i].1 = x,
            (Some(i), None) => {
                fs.remove(i);
            }
            (None, Some(x)) => fs.push((label.to_string(), x)),
            (None, None) => {}
        }
    }
}

fn first_label(v: &GroundValue) -> Option<String> {
    match v {
        GroundValue::Record(fs) => fs.first().map(|(l, _)| l.clone()),
        _ => None,
    }
}

/// An entity value that may or may not conform to `c`: a valid entity with
/// zero to two random mutations.
pub fn mutated_entity(r: &mut ChaCha8Rng, c: &ServerConfig) -> GroundValue {
    let mut v = valid_entity(r, c).to_value();
    let all_actions: Vec<String> = c.action_params.keys().cloned().collect();
    for _ in 0..r.gen_range(0..=2) {
        match r.gen_range(0..16) {
            0 => set_field(&mut v, "name", Some(GroundValue::str("Ctl.missing"))),
            1 => set_field(&mut v, "name", Some(GroundValue::str(WILDCARD))),
            2 => set_field(&mut v, "matches", Some(GroundValue::str(WILDCARD))),
            3 => {
                let mut m = v.field("matches").cloned().unwrap();
                if let Some(l) = first_label(&m) {
                    set_field(&mut m, &l, None);
                }
                set_field(&mut v, "matches", Some(m));
            }
            4 => {
                let mut m = v.field("matches").cloned().unwrap();
                set_field(&mut m, "hdr.extra", Some(any_atom(r)));
                set_field(&mut v, "matches", Some(m));
            }
            5 => {
                let mut m = v.field("matches").cloned().unwrap();
                if let Some(l) = first_label(&m) {
                    let kind = *KINDS.choose(r).unwrap();
                    let x = if r.gen_bool(0.5) { kind_record(r, kind) } else { match_value(r, kind) };
                    set_field(&mut m, &l, Some(x));
                }
                set_field(&mut v, "matches", Some(m));
            }
            6 => {
                let a = all_actions.choose(r).unwrap().clone();
                set_field(&mut v, "action", Some(GroundValue::str(a)));
            }
            7 => set_field(&mut v, "action", Some(GroundValue::str(WILDCARD))),
            8 => set_field(&mut v, "action", Some(GroundValue::str("Ctl.unknown"))),
            9 => {
                let mut p = v.field("params").cloned().unwrap();
                if let Some(l) = first_label(&p) {
                    set_field(&mut p, &l, None);
                }
                set_field(&mut v, "params", Some(p));
            }
            10 => {
                let mut p = v.field("params").cloned().unwrap();
                if let Some(l) = first_label(&p) {
                    set_field(&mut p, &l, Some(any_atom(r)));
                }
                set_field(&mut v, "params", Some(p));
            }
            11 => set_field(&mut v, "params", Some(if r.gen_bool(0.5) { GroundValue::Unit } else { any_atom(r) })),
            12 => {
                let mut p = v.field("params").cloned().unwrap();
                set_field(&mut p, "extra", Some(bytes(r)));
                set_field(&mut v, "params", Some(p));
            }
            13 => set_field(&mut v, "priority", Some(GroundValue::Int(r.gen_range(0..10)))),
            14 => {
                v = GroundValue::record([
                    ("name", GroundValue::str(WILDCARD)),
                    ("matches", GroundValue::str(WILDCARD)),
                    ("action", GroundValue::str(WILDCARD)),
                    ("params", GroundValue::Unit),
                ])
            }
            _ => set_field(&mut v, "matches", Some(any_atom(r))),
        }
    }
    v
}

// ---- conformance oracle ----

fn is_bytes(v: Option<&GroundValue>) -> bool {
    matches!(v, Some(GroundValue::Bytes(_)))
}

fn kind_shape_ok(v: &GroundValue, kind: MatchKind) -> bool {
    let rec_ok = |x: &GroundValue| match kind {
        MatchKind::Exact | MatchKind::Optional => is_bytes(x.field("value")),
        MatchKind::Ternary => is_bytes(x.field("value")) && is_bytes(x.field("mask")),
        MatchKind::Lpm => is_bytes(x.field("value")) && matches!(x.field("prefixLen"), Some(GroundValue::Int(_))),
        MatchKind::Range => is_bytes(x.field("low")) && is_bytes(x.field("high")),
    };
    if !matches!(v, GroundValue::Record(_)) {
        return false;
    }
    if kind == MatchKind::Exact {
        return rec_ok(v);
    }
    v.field("some").is_some_and(|s| matches!(s, GroundValue::Record(_)) && rec_ok(s))
        || v.field("none") == Some(&GroundValue::Unit)
}

/// Conformance decided directly from the configuration tables. Records may
/// carry extra labels, as value membership allows.
pub fn oracle_conforms(v: &GroundValue, c: &ServerConfig) -> bool {
    let (Some(GroundValue::Str(name)), Some(m), Some(GroundValue::Str(a)), Some(p)) =
        (v.field("name"), v.field("matches"), v.field("action"), v.field("params"))
    else {
        return false;
    };
    let wild = |x: &GroundValue| *x == GroundValue::str(WILDCARD);
    if name == WILDCARD {
        return wild(m) && a == WILDCARD && *p == GroundValue::Unit;
    }
    let Some(fields) = c.table_matches.get(name) else {
        return false;
    };
    let matches_ok = wild(m)
        || (matches!(m, GroundValue::Record(_))
            && fields.iter().all(|f| m.field(&f.name).is_some_and(|x| kind_shape_ok(x, f.kind))));
    let action_ok =
        c.table_actions[name].iter().any(|x| x == a) || (c.options.action_wildcards && a == WILDCARD);
    let params_ok = if a == WILDCARD {
        *p == GroundValue::Unit
    } else {
        match c.action_params.get(a) {
            Some(ps) if ps.is_empty() => *p == GroundValue::Unit,
            Some(ps) => matches!(p, GroundValue::Record(_)) && ps.iter().all(|x| is_bytes(p.field(&x.name))),
            None => false,
        }
    };
    matches_ok && action_ok && params_ok
}

// ---- read oracle ----

/// A canonical rendering with record fields sorted by label.
pub fn canon(v: &GroundValue) -> String {
    let mut s = String::new();
    canon_into(v, &mut s);
    s
}

fn canon_into(v: &GroundValue, s: &mut String) {
    match v {
        GroundValue::Record(fs) => {
            let mut fs: Vec<_> = fs.iter().collect();
            fs.sort_by(|a, b| a.0.cmp(&b.0));
            s.push('{');
            for (l, x) in fs {
                let _ = write!(s, "{l:?}:");
                canon_into(x, s);
                s.push(',');
            }
            s.push('}');
        }
        GroundValue::Cons(h, t) => {
            s.push_str("cons(");
            canon_into(h, s);
            s.push(',');
            canon_into(t, s);
            s.push(')');
        }
        GroundValue::Addr { name, .. } => {
            let _ = write!(s, "addr({name:?})");
        }
        GroundValue::Chan { id, .. } => {
            let _ = write!(s, "chan({:?},{})", id.server, id.index);
        }
        other => {
            let _ = write!(s, "{other:?}");
        }
    }
}

/// Single-pass filter over the stored entities.
pub fn oracle_read(es: &[Entity], q: &Entity) -> Vec<Entity> {
    let qm = canon(&q.field_matches);
    let wild_m = q.field_matches == GroundValue::str(WILDCARD);
    es.iter()
        .filter(|e| {
            (q.table_name == WILDCARD || e.table_name == q.table_name)
                && (wild_m || canon(&e.field_matches) == qm)
                && (q.action_name == WILDCARD || e.action_name == q.action_name)
                && q.priority.is_none_or(|p| e.priority == Some(p))
        })
        .cloned()
        .collect()
}

fn reorder(v: &GroundValue) -> GroundValue {
    match v {
        GroundValue::Record(fs) => GroundValue::Record(fs.iter().rev().map(|(l, x)| (l.clone(), reorder(x))).collect()),
        other => other.clone(),
    }
}

/// A store of valid entities, some with priorities, and a query that often
/// hits stored keys.
pub fn gen_store_and_query(r: &mut ChaCha8Rng, c: &ServerConfig) -> (Vec<Entity>, Entity) {
    let n = r.gen_range(0..12);
    let mut es: Vec<Entity> = Vec::new();
    for _ in 0..n {
        let mut e = if !es.is_empty() && r.gen_bool(0.2) {
            let mut e = es.choose(r).unwrap().clone();
            e.action_args = valid_params(r, &c.action_params[&e.action_name]);
            e
        } else {
            valid_entity(r, c)
        };
        if r.gen_bool(0.3) {
            e.priority = Some(r.gen_range(0..3));
        }
        es.push(e);
    }
    let mut q = if !es.is_empty() && r.gen_bool(0.7) { es.choose(r).unwrap().clone() } else { valid_entity(r, c) };
    if r.gen_bool(0.3) {
        q.field_matches = reorder(&q.field_matches);
    }
    if r.gen_bool(0.3) {
        q.table_name = WILDCARD.into();
    }
    if r.gen_bool(0.4) {
        q.field_matches = GroundValue::str(WILDCARD);
    }
    if r.gen_bool(0.4) {
        q.action_name = WILDCARD.into();
    }
    q.priority = if r.gen_bool(0.3) { Some(r.gen_range(0..3)) } else { None };
    (es, q)
}

// ---- networks ----

fn lit(v: &GroundValue) -> Term {
    Term::Lit(v.clone())
}

fn query_value(r: &mut ChaCha8Rng, c: &ServerConfig) -> GroundValue {
    let (table, _) = c.table_matches.iter().nth(r.gen_range(0..c.table_matches.len())).unwrap();
    let (action, params) = if c.options.action_wildcards && r.gen_bool(0.5) {
        (WILDCARD.to_string(), GroundValue::Unit)
    } else {
        let a = c.table_actions[table].choose(r).unwrap().clone();
        let p = valid_params(r, &c.action_params[&a]);
        (a, p)
    };
    GroundValue::record([
        ("name", GroundValue::str(table.clone())),
        ("matches", GroundValue::str(WILDCARD)),
        ("action", GroundValue::str(action)),
        ("params", params),
    ])
}

fn entity_type(s: &ServerState, e: &Entity) -> Type {
    let sig = s.sig();
    sugar::p4entity(
        sig.tm.clone(),
        sig.ta.clone(),
        sig.tp.clone(),
        Type::str_singleton(e.table_name.clone()),
        Type::str_singleton(e.action_name.clone()),
    )
}

/// One client statement over the channel variable `c` bound to `s`.
fn statement(r: &mut ChaCha8Rng, s: &ServerState, c: &str, known: &mut Vec<Entity>) -> Term {
    let cfg = &s.config;
    let chan = Term::var(c);
    let pick_entity = |r: &mut ChaCha8Rng, known: &Vec<Entity>| {
        if !known.is_empty() && r.gen_bool(0.5) {
            let mut e = known.choose(r).unwrap().clone();
            e.action_name = cfg.table_actions[&e.table_name].choose(r).unwrap().clone();
            e.action_args = valid_params(r, &cfg.action_params[&e.action_name]);
            e
        } else {
            valid_entity(r, cfg)
        }
    };
    match r.gen_range(0..10) {
        0 | 1 => {
            let e = pick_entity(r, known);
            known.push(e.clone());
            Term::op(OpKind::Insert, vec![chan, lit(&e.to_value())])
        }
        2 => Term::op(OpKind::Modify, vec![chan, lit(&pick_entity(r, known).to_value())]),
        3 => Term::op(OpKind::Delete, vec![chan, lit(&pick_entity(r, known).to_value())]),
        4 => Term::op(OpKind::Read, vec![chan, lit(&query_value(r, cfg))]),
        5 => {
            let read = Term::op(OpKind::Read, vec![chan, lit(&query_value(r, cfg))]);
            Term::match_on(
                Term::head(read),
                vec![
                    MatchArm { var: "x".into(), ty: Type::record([("some", Type::Top)]), body: Term::bool(true) },
                    MatchArm { var: "n".into(), ty: Type::record([("none", Type::UNIT)]), body: Term::bool(false) },
                ],
            )
        }
        6 => {
            let e = pick_entity(r, known);
            let f = Term::lam("e", entity_type(s, &e), Term::op(OpKind::Insert, vec![chan, Term::var("e")]));
            known.push(e.clone());
            Term::app(f, lit(&e.to_value()))
        }
        7 => {
            let q = GroundValue::record([
                ("name", GroundValue::str(WILDCARD)),
                ("matches", GroundValue::str(WILDCARD)),
                ("action", GroundValue::str(WILDCARD)),
                ("params", GroundValue::Unit),
            ]);
            let kind = [OpKind::Read, OpKind::Delete, OpKind::Insert].choose(r).copied().unwrap();
            Term::op(kind, vec![chan, lit(&q)])
        }
        8 => {
            let id = Term::tlam("X", Type::Top, Term::lam("y", Type::var("X"), Term::var("y")));
            Term::app(Term::tapp(id, Type::BOOL), Term::bool(r.gen_bool(0.5)))
        }
        _ => {
            let rec = Term::record([("l", Term::int(r.gen_range(0..9))), ("k", Term::str("v"))]);
            Term::field(rec, "l")
        }
    }
}

/// A client that connects to one or two servers and issues a few operations.
pub fn gen_client(r: &mut ChaCha8Rng, servers: &[ServerState]) -> Term {
    let targets: Vec<usize> = (0..r.gen_range(1..=2)).map(|_| r.gen_range(0..servers.len())).collect();
    let mut stmts: Vec<(String, Term)> = Vec::new();
    let mut known: Vec<Vec<Entity>> = vec![Vec::new(); servers.len()];
    for (i, &si) in targets.iter().enumerate() {
        stmts.push((format!("c{i}"), Term::op(OpKind::Connect, vec![lit(&servers[si].address)])));
    }
    let n = r.gen_range(1..=5);
    for j in 0..n {
        let i = r.gen_range(0..targets.len());
        let si = targets[i];
        let t = statement(r, &servers[si], &format!("c{i}"), &mut known[si]);
        stmts.push((format!("r{j}"), t));
    }
    let result = match r.gen_range(0..3) {
        0 => Term::bool(true),
        1 => Term::var(format!("r{}", n - 1)),
        _ => Term::record((0..n).map(|j| (format!("f{j}"), Term::var(format!("r{j}"))))),
    };
    stmts.into_iter().rev().fold(result, |body, (x, t)| Term::let_in(x, t, body))
}

pub fn gen_servers(r: &mut ChaCha8Rng) -> Vec<ServerState> {
    let shared = gen_config(r);
    (0..r.gen_range(1..=3))
        .map(|i| {
            let cfg = if r.gen_bool(0.5) { shared.clone() } else { gen_config(r) };
            let es: Vec<Entity> = (0..r.gen_range(0..4)).map(|_| valid_entity(r, &cfg)).collect();
            let mut uniq: Vec<Entity> = Vec::new();
            for e in es {
                if !uniq.iter().any(|u| u.table_name == e.table_name && canon(&u.field_matches) == canon(&e.field_matches)) {
                    uniq.push(e);
                }
            }
            ServerState::new(format!("sw{i}"), cfg).with_entities(uniq)
        })
        .collect()
}

pub fn gen_network(r: &mut ChaCha8Rng) -> p4typed::network::Network {
    let servers = gen_servers(r);
    let clients = (0..r.gen_range(1..=3)).map(|i| (format!("client{i}"), gen_client(r, &servers))).collect();
    p4typed::network::Network::new(clients, servers)
}

// ---- types ----

fn singleton(r: &mut ChaCha8Rng) -> Type {
    let v = match r.gen_range(0..6) {
        0 => GroundValue::Int(r.gen_range(0..3)),
        1 => GroundValue::str(["a", "b"].choose(r).unwrap().to_string()),
        2 => GroundValue::Bool(r.gen_bool(0.5)),
        3 => GroundValue::Unit,
        4 => GroundValue::Bytes(vec![r.gen_range(0..2)]),
        _ => GroundValue::record([("a", GroundValue::Int(r.gen_range(0..2)))]),
    };
    Type::singleton(v)
}

fn base(r: &mut ChaCha8Rng) -> Type {
    let b = [BaseType::Int, BaseType::Bool, BaseType::String, BaseType::Unit, BaseType::Bytes];
    Type::Base(*b.choose(r).unwrap())
}

/// A closed, valid type of bounded depth.
pub fn gen_type(r: &mut ChaCha8Rng, depth: u32) -> Type {
    if depth == 0 || r.gen_bool(0.3) {
        return match r.gen_range(0..5) {
            0 => Type::Top,
            1 | 2 => base(r),
            _ => singleton(r),
        };
    }
    match r.gen_range(0..8) {
        0 => Type::list(gen_type(r, depth - 1)),
        1 => {
            let mut fs: IndexMap<String, Type> = IndexMap::new();
            for l in ["a", "b"] {
                if fs.is_empty() || r.gen_bool(0.5) {
                    fs.insert(l.to_string(), gen_type(r, depth - 1));
                }
            }
            Type::Record(fs.into_iter().collect())
        }
        2 | 3 => Type::union(gen_type(r, depth - 1), gen_type(r, depth - 1)),
        4 => Type::arrow(gen_type(r, depth - 1), gen_type(r, depth - 1)),
        5 => Type::forall_top("X", Type::arrow(Type::var("X"), Type::var("X"))),
        6 => {
            let scrut = singleton(r);
            let cases = vec![(base(r), gen_type(r, depth - 1)), (Type::Top, gen_type(r, depth - 1))];
            Type::match_type(scrut, cases)
        }
        _ => Type::app(Type::forall_top("Y", Type::record([("a", Type::var("Y"))])), gen_type(r, depth - 1)),
    }
}

/// A pair biased towards related types so that both relations fire.
pub fn gen_type_pair(r: &mut ChaCha8Rng) -> (Type, Type) {
    let t = gen_type(r, 3);
    let u = match r.gen_range(0..4) {
        0 => t.clone(),
        1 => Type::union(t.clone(), gen_type(r, 2)),
        2 => Type::list(gen_type(r, 2)),
        _ => gen_type(r, 3),
    };
    if r.gen_bool(0.5) {
        (t, u)
    } else {
        (u, t)
    }
}
