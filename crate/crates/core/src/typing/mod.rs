//! Environment and type validity, membership of ground values, normalization,
//! subtyping, disjointness and term typing.

mod check;
mod env;
mod relations;

use std::fmt;

pub use env::{Binding, TypingEnv};
pub use relations::{inhabitants, CaseSelection, Checker, DEFAULT_FUEL};

use crate::ast::{GroundValue, Term, Type};
use crate::syntax::print_type;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TypeErrorKind {
    InvalidEnv,
    InvalidType,
    NotSubtype,
    NotExhaustive,
    NoMatchCase,
    UnknownVariable,
    FieldMissing,
    OpArgMismatch,
    NormalizationFuelExhausted,
}

impl TypeErrorKind {
    pub fn describe(self) -> &'static str {
        match self {
            TypeErrorKind::InvalidEnv => "invalid typing environment",
            TypeErrorKind::InvalidType => "invalid type",
            TypeErrorKind::NotSubtype => "type mismatch",
            TypeErrorKind::NotExhaustive => "non-exhaustive match",
            TypeErrorKind::NoMatchCase => "no match type case applies",
            TypeErrorKind::UnknownVariable => "unknown variable",
            TypeErrorKind::FieldMissing => "missing record field",
            TypeErrorKind::OpArgMismatch => "bad operation argument",
            TypeErrorKind::NormalizationFuelExhausted => "type normalization ran out of fuel",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub location: String,
    pub expected: Option<Type>,
    pub actual: Option<Type>,
}

impl TypeError {
    pub fn new(kind: TypeErrorKind, location: impl Into<String>) -> Self {
        TypeError { kind, location: location.into(), expected: None, actual: None }
    }

    pub fn with_expected(mut self, t: Type) -> Self {
        self.expected = Some(t);
        self
    }

    pub fn with_actual(mut self, t: Type) -> Self {
        self.actual = Some(t);
        self
    }
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.kind.describe())?;
        match (&self.expected, &self.actual) {
            (Some(e), Some(a)) => write!(f, ": a value of type {} is required, found {}", print_type(e), print_type(a)),
            (Some(e), None) => write!(f, ": a value of type {} is required", print_type(e)),
            (None, Some(a)) => write!(f, ": found {}", print_type(a)),
            (None, None) => Ok(()),
        }
    }
}

impl std::error::Error for TypeError {}

pub fn env_valid(env: &TypingEnv) -> bool {
    Checker::default().env_valid(env)
}

pub fn type_valid(env: &TypingEnv, t: &Type) -> bool {
    Checker::default().type_valid(env, t)
}

/// Membership of a ground value in a closed type.
pub fn member_of(v: &GroundValue, t: &Type) -> bool {
    Checker::default().member_of(&TypingEnv::new(), v, t)
}

pub fn normalize_type(env: &TypingEnv, t: &Type, fuel: usize) -> Result<Type, TypeError> {
    let c = Checker::new(fuel);
    let r = c.normalize(env, t);
    if c.exhausted() {
        Err(TypeError::new(TypeErrorKind::NormalizationFuelExhausted, "type normalization").with_actual(t.clone()))
    } else {
        Ok(r)
    }
}

pub fn subtype(env: &TypingEnv, s: &Type, t: &Type) -> bool {
    Checker::default().subtype(env, s, t)
}

pub fn disjoint(env: &TypingEnv, s: &Type, t: &Type) -> bool {
    Checker::default().disjoint(env, s, t)
}

pub fn typecheck(env: &TypingEnv, t: &Term) -> Result<Type, TypeError> {
    typecheck_with_fuel(env, t, DEFAULT_FUEL)
}

pub fn typecheck_with_fuel(env: &TypingEnv, t: &Term, fuel: usize) -> Result<Type, TypeError> {
    let c = Checker::new(fuel);
    if !c.env_valid(env) {
        return Err(TypeError::new(TypeErrorKind::InvalidEnv, "typing environment"));
    }
    c.typecheck(env, t)
}
