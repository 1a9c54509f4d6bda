//! Canonical JSON forms of ground values and types.
//!
//! Ground values: `null` is unit, numbers, booleans and strings map to
//! themselves, arrays are lists, objects are records, and
//! `{"$bytes": [..]}` is a byte string. Addresses and channels render as
//! `{"$addr": name}` and `{"$chan": "server#n"}` and are not accepted back.

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::ast::{GroundValue, Type};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid value JSON: {0}")]
pub struct JsonError(pub String);

pub fn ground_to_json(v: &GroundValue) -> Value {
    match v {
        GroundValue::Unit => Value::Null,
        GroundValue::Int(n) => json!(n),
        GroundValue::Bool(b) => json!(b),
        GroundValue::Str(s) => json!(s),
        GroundValue::Bytes(bs) => json!({ "$bytes": bs }),
        GroundValue::Addr { name, .. } => json!({ "$addr": name }),
        GroundValue::Chan { id, .. } => json!({ "$chan": id.to_string() }),
        GroundValue::Nil | GroundValue::Cons(..) => {
            Value::Array(v.list_items().unwrap_or_default().into_iter().map(ground_to_json).collect())
        }
        GroundValue::Record(fs) => {
            Value::Object(fs.iter().map(|(l, v)| (l.clone(), ground_to_json(v))).collect::<Map<_, _>>())
        }
    }
}

pub fn ground_from_json(j: &Value) -> Result<GroundValue, JsonError> {
    Ok(match j {
        Value::Null => GroundValue::Unit,
        Value::Bool(b) => GroundValue::Bool(*b),
        Value::Number(n) => GroundValue::Int(n.as_i64().ok_or_else(|| JsonError(format!("not an integer: {n}")))?),
        Value::String(s) => GroundValue::Str(s.clone()),
        Value::Array(items) => GroundValue::list(items.iter().map(ground_from_json).collect::<Result<Vec<_>, _>>()?),
        Value::Object(m) => {
            if let Some(bs) = m.get("$bytes") {
                let arr = bs.as_array().ok_or_else(|| JsonError("$bytes must be an array".into()))?;
                let bytes = arr
                    .iter()
                    .map(|b| b.as_u64().filter(|n| *n <= 255).map(|n| n as u8))
                    .collect::<Option<Vec<u8>>>()
                    .ok_or_else(|| JsonError("byte values must be in 0..255".into()))?;
                return Ok(GroundValue::Bytes(bytes));
            }
            if m.keys().any(|k| k.starts_with('$')) {
                return Err(JsonError("addresses and channels cannot be read back".into()));
            }
            GroundValue::Record(
                m.iter().map(|(l, v)| Ok((l.clone(), ground_from_json(v)?))).collect::<Result<Vec<_>, JsonError>>()?,
            )
        }
    })
}

pub fn type_to_json(t: &Type) -> Value {
    match t {
        Type::Top => json!({ "kind": "top" }),
        Type::Base(b) => json!({ "kind": b.name().to_ascii_lowercase() }),
        Type::ServerRef(s) | Type::Chan(s) => json!({
            "kind": if matches!(t, Type::ServerRef(_)) { "serverref" } else { "chan" },
            "tm": type_to_json(&s.tm),
            "ta": type_to_json(&s.ta),
            "tp": type_to_json(&s.tp),
        }),
        Type::Record(fs) => json!({
            "kind": "record",
            "fields": fs.iter().map(|(l, t)| json!([l, type_to_json(t)])).collect::<Vec<_>>(),
        }),
        Type::List(e) => json!({ "kind": "list", "elem": type_to_json(e) }),
        Type::Arrow(a, b) => json!({ "kind": "arrow", "param": type_to_json(a), "result": type_to_json(b) }),
        Type::Var(x) => json!({ "kind": "var", "name": x }),
        Type::Forall(x, b, body) => json!({
            "kind": "forall", "var": x, "bound": type_to_json(b), "body": type_to_json(body),
        }),
        Type::App(f, a) => json!({ "kind": "app", "fun": type_to_json(f), "arg": type_to_json(a) }),
        Type::Union(a, b) => json!({ "kind": "union", "left": type_to_json(a), "right": type_to_json(b) }),
        Type::Singleton(v) => json!({ "kind": "singleton", "value": ground_to_json(v) }),
        Type::Match(s, cases) => json!({
            "kind": "match",
            "scrutinee": type_to_json(s),
            "cases": cases.iter().map(|(p, c)| json!({ "pattern": type_to_json(p), "result": type_to_json(c) })).collect::<Vec<_>>(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_round_trip() {
        let v = GroundValue::record([
            ("a", GroundValue::list([GroundValue::Int(1), GroundValue::Unit])),
            ("b", GroundValue::Bytes(vec![10, 0, 0, 1])),
            ("c", GroundValue::record([("none", GroundValue::Unit)])),
            ("d", GroundValue::str("*")),
        ]);
        let j = ground_to_json(&v);
        assert_eq!(j["b"], json!({"$bytes": [10, 0, 0, 1]}));
        assert_eq!(ground_from_json(&j).unwrap(), v);
    }

    #[test]
    fn bad_bytes_rejected() {
        assert!(ground_from_json(&json!({"$bytes": [256]})).is_err());
        assert!(ground_from_json(&json!({"$addr": "s1"})).is_err());
    }

    #[test]
    fn type_json_is_tagged() {
        let t = Type::union(Type::str_singleton("*"), Type::record([("value", Type::BYTES)]));
        let j = type_to_json(&t);
        assert_eq!(j["kind"], "union");
        assert_eq!(j["left"]["value"], "*");
        assert_eq!(j["right"]["fields"][0][0], "value");
    }
}
