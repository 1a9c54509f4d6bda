use std::collections::BTreeSet;
use std::sync::Arc;

use crate::ast::{Name, Type};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Binding {
    Term(Name, Type),
    TypeVar(Name, Type),
}

/// Ordered typing environment; later bindings shadow nothing because names
/// are kept distinct by the checker. Bindings are shared, so extending a
/// copy is cheap.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypingEnv {
    bindings: Vec<Arc<Binding>>,
}

impl TypingEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bindings(bindings: Vec<Binding>) -> Self {
        TypingEnv { bindings: bindings.into_iter().map(Arc::new).collect() }
    }

    pub fn bindings(&self) -> impl Iterator<Item = &Binding> {
        self.bindings.iter().map(|b| &**b)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn with_term(&self, x: impl Into<Name>, t: Type) -> Self {
        let mut e = self.clone();
        e.bindings.push(Arc::new(Binding::Term(x.into(), t)));
        e
    }

    pub fn with_tvar(&self, x: impl Into<Name>, bound: Type) -> Self {
        let mut e = self.clone();
        e.bindings.push(Arc::new(Binding::TypeVar(x.into(), bound)));
        e
    }

    pub fn push_term(&mut self, x: impl Into<Name>, t: Type) {
        self.bindings.push(Arc::new(Binding::Term(x.into(), t)));
    }

    pub fn push_tvar(&mut self, x: impl Into<Name>, bound: Type) {
        self.bindings.push(Arc::new(Binding::TypeVar(x.into(), bound)));
    }

    pub fn pop(&mut self) {
        self.bindings.pop();
    }

    pub fn lookup_term(&self, x: &str) -> Option<&Type> {
        self.bindings.iter().rev().find_map(|b| match &**b {
            Binding::Term(y, t) if y == x => Some(t),
            _ => None,
        })
    }

    pub fn lookup_tvar(&self, x: &str) -> Option<&Type> {
        self.bindings.iter().rev().find_map(|b| match &**b {
            Binding::TypeVar(y, t) if y == x => Some(t),
            _ => None,
        })
    }

    pub fn has_term(&self, x: &str) -> bool {
        self.lookup_term(x).is_some()
    }

    pub fn has_tvar(&self, x: &str) -> bool {
        self.lookup_tvar(x).is_some()
    }

    pub fn term_names(&self) -> BTreeSet<Name> {
        self.bindings
            .iter()
            .filter_map(|b| match &**b {
                Binding::Term(x, _) => Some(x.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn tvar_names(&self) -> BTreeSet<Name> {
        self.bindings
            .iter()
            .filter_map(|b| match &**b {
                Binding::TypeVar(x, _) => Some(x.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn prefix(&self, n: usize) -> TypingEnv {
        TypingEnv { bindings: self.bindings[..n].to_vec() }
    }
}
