//! P4Info ingestion, server configurations, and their translation into the
//! three channel type parameters.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{sugar, ChanSig, Name, Type, WILDCARD};
use crate::syntax::print_decls;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MatchKind {
    Exact,
    Ternary,
    Lpm,
    Range,
    Optional,
}

impl MatchKind {
    pub const ALL: [MatchKind; 5] = [MatchKind::Exact, MatchKind::Ternary, MatchKind::Lpm, MatchKind::Range, MatchKind::Optional];

    pub fn name(self) -> &'static str {
        match self {
            MatchKind::Exact => "EXACT",
            MatchKind::Ternary => "TERNARY",
            MatchKind::Lpm => "LPM",
            MatchKind::Range => "RANGE",
            MatchKind::Optional => "OPTIONAL",
        }
    }

    /// Labels and types of the match value record for this kind.
    pub fn value_fields(self) -> &'static [(&'static str, MatchValueType)] {
        use MatchValueType::*;
        match self {
            MatchKind::Exact | MatchKind::Optional => &[("value", Bytes)],
            MatchKind::Ternary => &[("value", Bytes), ("mask", Bytes)],
            MatchKind::Lpm => &[("value", Bytes), ("prefixLen", Int)],
            MatchKind::Range => &[("low", Bytes), ("high", Bytes)],
        }
    }

    /// Whether the match value is wrapped in an option.
    pub fn optional(self) -> bool {
        self != MatchKind::Exact
    }

    /// The type of a match value of this kind.
    pub fn encode(self) -> Type {
        let rec = Type::record(self.value_fields().iter().map(|(l, t)| (*l, t.to_type())));
        if self.optional() {
            sugar::option_expanded(rec)
        } else {
            rec
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchValueType {
    Bytes,
    Int,
}

impl MatchValueType {
    pub fn to_type(self) -> Type {
        match self {
            MatchValueType::Bytes => Type::BYTES,
            MatchValueType::Int => Type::INT,
        }
    }
}

impl FromStr for MatchKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "EXACT" => Ok(MatchKind::Exact),
            "TERNARY" => Ok(MatchKind::Ternary),
            "LPM" => Ok(MatchKind::Lpm),
            "RANGE" => Ok(MatchKind::Range),
            "OPTIONAL" => Ok(MatchKind::Optional),
            _ => Err(ConfigError::Schema(format!("unknown match type `{s}`"))),
        }
    }
}

impl fmt::Display for MatchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchField {
    pub name: String,
    pub kind: MatchKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionParam {
    pub name: String,
    pub bitwidth: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EncodeOptions {
    /// Also admit `"*"` as the action of every table, so that queries may
    /// leave the action unconstrained.
    pub action_wildcards: bool,
}

/// Tables, their match fields and actions, and action parameters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ServerConfig {
    pub table_matches: IndexMap<String, Vec<MatchField>>,
    pub table_actions: IndexMap<String, Vec<String>>,
    pub action_params: IndexMap<String, Vec<ActionParam>>,
    pub options: EncodeOptions,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("P4Info schema error: {0}")]
    Schema(String),
    #[error("table `{table}` refers to unknown action id {id}")]
    DanglingActionRef { table: String, id: u64 },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl ServerConfig {
    pub fn with_options(mut self, options: EncodeOptions) -> Self {
        self.options = options;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        for name in self.table_matches.keys().chain(self.action_params.keys()) {
            if name.is_empty() || name == WILDCARD {
                return bad(format!("reserved or empty name `{name}`"));
            }
        }
        if self.table_matches.keys().collect::<BTreeSet<_>>() != self.table_actions.keys().collect::<BTreeSet<_>>() {
            return bad("table_matches and table_actions list different tables".into());
        }
        for (t, acts) in &self.table_actions {
            for a in acts {
                if !self.action_params.contains_key(a) {
                    return bad(format!("table `{t}` refers to undeclared action `{a}`"));
                }
            }
        }
        for (t, mfs) in &self.table_matches {
            let names: BTreeSet<&str> = mfs.iter().map(|m| m.name.as_str()).collect();
            if names.len() != mfs.len() {
                return bad(format!("table `{t}` has duplicate match fields"));
            }
        }
        for (a, ps) in &self.action_params {
            let names: BTreeSet<&str> = ps.iter().map(|p| p.name.as_str()).collect();
            if names.len() != ps.len() {
                return bad(format!("action `{a}` has duplicate parameters"));
            }
            if ps.iter().any(|p| p.bitwidth == 0) {
                return bad(format!("action `{a}` has a zero-width parameter"));
            }
        }
        Ok(())
    }

    pub fn encode(&self) -> ChanSig {
        encode_config(self)
    }
}

// ---- P4Info documents ----

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct P4Info {
    #[serde(default)]
    pub tables: Vec<P4Table>,
    #[serde(default)]
    pub actions: Vec<P4Action>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Preamble {
    #[serde(default)]
    pub id: u64,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct P4Table {
    pub preamble: Preamble,
    #[serde(default)]
    pub match_fields: Vec<P4MatchField>,
    #[serde(default)]
    pub action_refs: Vec<ActionRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct P4MatchField {
    #[serde(default)]
    pub id: u64,
    pub name: String,
    #[serde(default)]
    pub bitwidth: u32,
    pub match_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionRef {
    pub id: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct P4Action {
    pub preamble: Preamble,
    #[serde(default)]
    pub params: Vec<P4Param>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct P4Param {
    #[serde(default)]
    pub id: u64,
    pub name: String,
    pub bitwidth: u32,
}

pub fn parse_p4info(text: &str) -> Result<P4Info, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError::Schema(e.to_string()))
}

pub fn to_config(doc: &P4Info) -> Result<ServerConfig, ConfigError> {
    let mut cfg = ServerConfig::default();
    let mut by_id: IndexMap<u64, &str> = IndexMap::new();
    for a in &doc.actions {
        if cfg.action_params.contains_key(&a.preamble.name) {
            return Err(ConfigError::Schema(format!("duplicate action `{}`", a.preamble.name)));
        }
        by_id.insert(a.preamble.id, &a.preamble.name);
        let params = a.params.iter().map(|p| ActionParam { name: p.name.clone(), bitwidth: p.bitwidth }).collect();
        cfg.action_params.insert(a.preamble.name.clone(), params);
    }
    for t in &doc.tables {
        let name = &t.preamble.name;
        if cfg.table_matches.contains_key(name) {
            return Err(ConfigError::Schema(format!("duplicate table `{name}`")));
        }
        let mfs = t
            .match_fields
            .iter()
            .map(|m| Ok(MatchField { name: m.name.clone(), kind: m.match_type.parse()? }))
            .collect::<Result<Vec<_>, ConfigError>>()?;
        let acts = t
            .action_refs
            .iter()
            .map(|r| {
                by_id
                    .get(&r.id)
                    .map(|n| n.to_string())
                    .ok_or_else(|| ConfigError::DanglingActionRef { table: name.clone(), id: r.id })
            })
            .collect::<Result<Vec<_>, _>>()?;
        cfg.table_matches.insert(name.clone(), mfs);
        cfg.table_actions.insert(name.clone(), acts);
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_p4info(text: &str) -> Result<ServerConfig, ConfigError> {
    to_config(&parse_p4info(text)?)
}

// ---- encoding ----

/// Record of match values for a table, or the wildcard.
pub fn encode_table_matches(mfs: &[MatchField]) -> Type {
    Type::union(
        Type::Record(mfs.iter().map(|m| (m.name.clone(), m.kind.encode())).collect()),
        Type::wildcard(),
    )
}

pub fn encode_table_actions(actions: &[String], options: EncodeOptions) -> Type {
    let mut parts: Vec<Type> = actions.iter().map(|a| Type::str_singleton(a.clone())).collect();
    if options.action_wildcards {
        parts.push(Type::wildcard());
    }
    // A table without actions admits no action name at all; an empty
    // record type stands in for the empty union.
    Type::union_of(parts).unwrap_or_else(|| Type::record(Vec::<(Name, Type)>::new()))
}

pub fn encode_action_params(params: &[ActionParam]) -> Type {
    if params.is_empty() {
        Type::UNIT
    } else {
        Type::Record(params.iter().map(|p| (p.name.clone(), Type::BYTES)).collect())
    }
}

fn dispatch(var: &str, cases: Vec<(Type, Type)>) -> Type {
    Type::forall_top(var, Type::match_type(Type::var(var), cases))
}

/// The channel signature `(Tm, Ta, Tp)` of a configuration.
pub fn encode_config(c: &ServerConfig) -> ChanSig {
    let mut tm: Vec<(Type, Type)> = c
        .table_matches
        .iter()
        .map(|(t, mfs)| (Type::str_singleton(t.clone()), encode_table_matches(mfs)))
        .collect();
    tm.push((Type::wildcard(), Type::wildcard()));
    let mut ta: Vec<(Type, Type)> = c
        .table_actions
        .iter()
        .map(|(t, acts)| (Type::str_singleton(t.clone()), encode_table_actions(acts, c.options)))
        .collect();
    ta.push((Type::wildcard(), Type::wildcard()));
    let mut tp: Vec<(Type, Type)> = c
        .action_params
        .iter()
        .map(|(a, ps)| (Type::str_singleton(a.clone()), encode_action_params(ps)))
        .collect();
    tp.push((Type::wildcard(), Type::UNIT));
    ChanSig::new(dispatch("T", tm), dispatch("T", ta), dispatch("A", tp))
}

/// Declarations `P_TM`, `P_TA`, `P_TP`, `P_Ref` and `P_Chan` for a config.
pub fn type_decls(c: &ServerConfig, prefix: &str) -> IndexMap<Name, Type> {
    let sig = encode_config(c);
    let mut decls = IndexMap::new();
    decls.insert(format!("{prefix}_TM"), sig.tm.clone());
    decls.insert(format!("{prefix}_TA"), sig.ta.clone());
    decls.insert(format!("{prefix}_TP"), sig.tp.clone());
    decls.insert(format!("{prefix}_Ref"), Type::server_ref(sig.clone()));
    decls.insert(format!("{prefix}_Chan"), Type::chan(sig));
    decls
}

pub fn emit_type_decls(c: &ServerConfig, prefix: &str) -> String {
    let mut out = String::new();
    for (table, mfs) in &c.table_matches {
        let keys: Vec<String> = mfs.iter().map(|m| format!("{} {}", m.name, m.kind)).collect();
        out.push_str(&format!("// table {table}: {}\n", keys.join(", ")));
    }
    out.push_str(&print_decls(&type_decls(c, prefix)));
    out
}

/// Params whose byte length exceeds the declared bit width.
pub fn lint_params(c: &ServerConfig, action: &str, args: &crate::ast::GroundValue) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(params) = c.action_params.get(action) {
        for p in params {
            if let Some(crate::ast::GroundValue::Bytes(bs)) = args.field(&p.name) {
                let max = (p.bitwidth as usize).div_ceil(8);
                if bs.len() > max {
                    out.push(format!(
                        "action `{action}` parameter `{}` has {} bytes but is {} bits wide",
                        p.name,
                        bs.len(),
                        p.bitwidth
                    ));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{alpha_eq, GroundValue};
    use crate::syntax::{parse_program, parse_type};

    const DOC: &str = r#"{
        "tables": [
            {"preamble": {"name": "IPv4_table"},
             "matchFields": [{"name": "IPv4_dst_addr", "matchType": "LPM"}],
             "actionRefs": [{"id": 1010}, {"id": 3030}]},
            {"preamble": {"name": "IPv6_table"},
             "matchFields": [{"name": "IPv6_dst_addr", "matchType": "lpm"}],
             "actionRefs": [{"id": 2020}, {"id": 3030}]}
        ],
        "actions": [
            {"preamble": {"id": 1010, "name": "IPv4_forward"},
             "params": [{"name": "mac_dst", "bitwidth": 48}, {"name": "port", "bitwidth": 9}]},
            {"preamble": {"id": 2020, "name": "IPv6_forward"},
             "params": [{"name": "mac_dst", "bitwidth": 48}, {"name": "port", "bitwidth": 9}]},
            {"preamble": {"id": 3030, "name": "Drop"}, "params": []}
        ]
    }"#;

    #[test]
    fn p4info_to_config() {
        let c = load_p4info(DOC).unwrap();
        assert_eq!(c.table_matches.len(), 2);
        assert_eq!(c.table_actions["IPv6_table"], vec!["IPv6_forward".to_string(), "Drop".to_string()]);
        assert_eq!(c.table_matches["IPv6_table"][0].kind, MatchKind::Lpm);
        assert_eq!(c.action_params["IPv4_forward"][1], ActionParam { name: "port".into(), bitwidth: 9 });
        assert!(c.action_params["Drop"].is_empty());
    }

    #[test]
    fn empty_and_dangling() {
        assert_eq!(load_p4info("{}").unwrap(), ServerConfig::default());
        let bad = r#"{"tables": [{"preamble": {"name": "t"}, "actionRefs": [{"id": 9999}]}]}"#;
        assert_eq!(load_p4info(bad).unwrap_err(), ConfigError::DanglingActionRef { table: "t".into(), id: 9999 });
        let bad = r#"{"tables": [{"preamble": {"name": "t"}, "matchFields": [{"name": "f", "matchType": "fuzzy"}]}]}"#;
        assert!(matches!(load_p4info(bad).unwrap_err(), ConfigError::Schema(_)));
    }

    #[test]
    fn encoded_cases() {
        let sig = encode_config(&load_p4info(DOC).unwrap());
        let ta = parse_type(
            "forall T. T match { \"IPv4_table\" => \"IPv4_forward\" | \"Drop\", \
             \"IPv6_table\" => \"IPv6_forward\" | \"Drop\", \"*\" => \"*\" }",
        )
        .unwrap();
        assert!(alpha_eq(&sig.ta, &ta));
        let tp = parse_type(
            "forall B. B match { \"IPv4_forward\" => {mac_dst: Bytes, port: Bytes}, \
             \"IPv6_forward\" => {mac_dst: Bytes, port: Bytes}, \"Drop\" => Unit, \"*\" => Unit }",
        )
        .unwrap();
        assert!(alpha_eq(&sig.tp, &tp));
    }

    #[test]
    fn empty_config_encodes_wildcards_only() {
        let sig = encode_config(&ServerConfig::default());
        assert!(alpha_eq(&sig.tm, &parse_type("forall T. T match { \"*\" => \"*\" }").unwrap()));
        assert!(alpha_eq(&sig.tp, &parse_type("forall T. T match { \"*\" => Unit }").unwrap()));
    }

    #[test]
    fn decls_round_trip() {
        let c = load_p4info(DOC).unwrap();
        let text = emit_type_decls(&c, "Fig");
        let prog = parse_program(&text).unwrap();
        let sig = encode_config(&c);
        assert_eq!(prog.decls["Fig_TM"], sig.tm);
        assert_eq!(prog.decls["Fig_TA"], sig.ta);
        assert_eq!(prog.decls["Fig_TP"], sig.tp);
        assert_eq!(prog.decls["Fig_Chan"], Type::chan(sig));
    }

    #[test]
    fn action_wildcards_option() {
        let c = load_p4info(DOC).unwrap().with_options(EncodeOptions { action_wildcards: true });
        let t = encode_table_actions(&c.table_actions["IPv4_table"], c.options);
        assert_eq!(t.union_parts().len(), 3);
    }

    #[test]
    fn param_width_lint() {
        let c = load_p4info(DOC).unwrap();
        let args = GroundValue::record([("mac_dst", GroundValue::Bytes(vec![0; 6])), ("port", GroundValue::Bytes(vec![1, 2, 3]))]);
        let w = lint_params(&c, "IPv4_forward", &args);
        assert_eq!(w.len(), 1);
        assert!(w[0].contains("port"));
    }
}
