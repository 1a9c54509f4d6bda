//! Abstract syntax of terms, types and ground values.
//!
//! Derived `PartialEq` is plain structural equality, sensitive to record
//! field order and bound-variable names. Use [`alpha_eq`] and
//! [`GroundValue::sem_eq`] when those differences should not matter.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

pub type Name = String;

/// The reserved wildcard string.
pub const WILDCARD: &str = "*";

/// The three type arguments carried by server addresses and channels.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChanSig {
    pub tm: Type,
    pub ta: Type,
    pub tp: Type,
}

impl ChanSig {
    pub fn new(tm: Type, ta: Type, tp: Type) -> Self {
        ChanSig { tm, ta, tp }
    }

    pub fn alpha_eq(&self, other: &ChanSig) -> bool {
        alpha_eq(&self.tm, &other.tm) && alpha_eq(&self.ta, &other.ta) && alpha_eq(&self.tp, &other.tp)
    }
}

/// Channel identity: owning server address plus a per-server counter.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChannelId {
    pub server: String,
    pub index: u64,
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.server, self.index)
    }
}

/// Values that contain no term or type abstraction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroundValue {
    Unit,
    Int(i64),
    Bool(bool),
    Str(String),
    Bytes(Vec<u8>),
    Addr { name: String, sig: Box<ChanSig> },
    Chan { id: ChannelId, sig: Box<ChanSig> },
    Nil,
    Cons(Box<GroundValue>, Box<GroundValue>),
    Record(Vec<(Name, GroundValue)>),
}

impl GroundValue {
    pub fn str(s: impl Into<String>) -> Self {
        GroundValue::Str(s.into())
    }

    pub fn record<I, S>(fields: I) -> Self
    where
        I: IntoIterator<Item = (S, GroundValue)>,
        S: Into<String>,
    {
        GroundValue::Record(fields.into_iter().map(|(l, v)| (l.into(), v)).collect())
    }

    pub fn list(items: impl IntoIterator<Item = GroundValue>) -> Self {
        let items: Vec<_> = items.into_iter().collect();
        items
            .into_iter()
            .rev()
            .fold(GroundValue::Nil, |acc, v| GroundValue::Cons(Box::new(v), Box::new(acc)))
    }

    pub fn is_wildcard(&self) -> bool {
        matches!(self, GroundValue::Str(s) if s == WILDCARD)
    }

    /// Elements of a nil-terminated list, or `None` for a non-list.
    pub fn list_items(&self) -> Option<Vec<&GroundValue>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                GroundValue::Nil => return Some(out),
                GroundValue::Cons(h, t) => {
                    out.push(h.as_ref());
                    cur = t;
                }
                _ => return None,
            }
        }
    }

    pub fn field(&self, label: &str) -> Option<&GroundValue> {
        match self {
            GroundValue::Record(fs) => fs.iter().find(|(l, _)| l == label).map(|(_, v)| v),
            _ => None,
        }
    }

    pub fn is_atomic(&self) -> bool {
        !matches!(self, GroundValue::Cons(..) | GroundValue::Record(..))
    }

    /// Equality ignoring record field order and bound-variable names in
    /// address and channel signatures.
    pub fn sem_eq(&self, other: &GroundValue) -> bool {
        use GroundValue::*;
        match (self, other) {
            (Record(a), Record(b)) => {
                a.len() == b.len()
                    && a.iter().all(|(l, v)| {
                        b.iter().find(|(m, _)| m == l).is_some_and(|(_, w)| v.sem_eq(w))
                    })
            }
            (Cons(h1, t1), Cons(h2, t2)) => h1.sem_eq(h2) && t1.sem_eq(t2),
            (Addr { name: n1, sig: s1 }, Addr { name: n2, sig: s2 }) => n1 == n2 && s1.alpha_eq(s2),
            (Chan { id: i1, sig: s1 }, Chan { id: i2, sig: s2 }) => i1 == i2 && s1.alpha_eq(s2),
            _ => self == other,
        }
    }

    /// Addresses and channels occurring anywhere inside the value.
    pub fn collect_refs<'a>(&'a self, out: &mut Vec<&'a GroundValue>) {
        match self {
            GroundValue::Addr { .. } | GroundValue::Chan { .. } => out.push(self),
            GroundValue::Cons(h, t) => {
                h.collect_refs(out);
                t.collect_refs(out);
            }
            GroundValue::Record(fs) => fs.iter().for_each(|(_, v)| v.collect_refs(out)),
            _ => {}
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseType {
    Int,
    Bool,
    String,
    Unit,
    Bytes,
}

impl BaseType {
    pub fn name(self) -> &'static str {
        match self {
            BaseType::Int => "Int",
            BaseType::Bool => "Bool",
            BaseType::String => "String",
            BaseType::Unit => "Unit",
            BaseType::Bytes => "Bytes",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Top,
    Base(BaseType),
    ServerRef(Box<ChanSig>),
    Chan(Box<ChanSig>),
    Record(Vec<(Name, Type)>),
    List(Box<Type>),
    Arrow(Box<Type>, Box<Type>),
    Var(Name),
    Forall(Name, Box<Type>, Box<Type>),
    App(Box<Type>, Box<Type>),
    Union(Box<Type>, Box<Type>),
    Singleton(Box<GroundValue>),
    Match(Box<Type>, Vec<(Type, Type)>),
}

impl Type {
    pub const INT: Type = Type::Base(BaseType::Int);
    pub const BOOL: Type = Type::Base(BaseType::Bool);
    pub const STRING: Type = Type::Base(BaseType::String);
    pub const UNIT: Type = Type::Base(BaseType::Unit);
    pub const BYTES: Type = Type::Base(BaseType::Bytes);

    pub fn var(x: impl Into<String>) -> Type {
        Type::Var(x.into())
    }

    pub fn singleton(v: GroundValue) -> Type {
        Type::Singleton(Box::new(v))
    }

    pub fn str_singleton(s: impl Into<String>) -> Type {
        Type::singleton(GroundValue::Str(s.into()))
    }

    pub fn wildcard() -> Type {
        Type::str_singleton(WILDCARD)
    }

    pub fn list(t: Type) -> Type {
        Type::List(Box::new(t))
    }

    pub fn arrow(a: Type, b: Type) -> Type {
        Type::Arrow(Box::new(a), Box::new(b))
    }

    pub fn app(f: Type, a: Type) -> Type {
        Type::App(Box::new(f), Box::new(a))
    }

    pub fn apply_all(f: Type, args: impl IntoIterator<Item = Type>) -> Type {
        args.into_iter().fold(f, Type::app)
    }

    pub fn union(a: Type, b: Type) -> Type {
        Type::Union(Box::new(a), Box::new(b))
    }

    /// Left-nested union of a non-empty sequence.
    pub fn union_of(items: impl IntoIterator<Item = Type>) -> Option<Type> {
        items.into_iter().reduce(Type::union)
    }

    pub fn forall(x: impl Into<String>, bound: Type, body: Type) -> Type {
        Type::Forall(x.into(), Box::new(bound), Box::new(body))
    }

    /// `forall X. body`, i.e. bounded by `Top`.
    pub fn forall_top(x: impl Into<String>, body: Type) -> Type {
        Type::forall(x, Type::Top, body)
    }

    pub fn record<I, S>(fields: I) -> Type
    where
        I: IntoIterator<Item = (S, Type)>,
        S: Into<String>,
    {
        Type::Record(fields.into_iter().map(|(l, t)| (l.into(), t)).collect())
    }

    pub fn match_type(scrutinee: Type, cases: Vec<(Type, Type)>) -> Type {
        Type::Match(Box::new(scrutinee), cases)
    }

    pub fn server_ref(sig: ChanSig) -> Type {
        Type::ServerRef(Box::new(sig))
    }

    pub fn chan(sig: ChanSig) -> Type {
        Type::Chan(Box::new(sig))
    }

    /// Flattened alternatives of nested unions.
    pub fn union_parts(&self) -> Vec<&Type> {
        let mut out = Vec::new();
        fn go<'a>(t: &'a Type, out: &mut Vec<&'a Type>) {
            match t {
                Type::Union(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                _ => out.push(t),
            }
        }
        go(self, &mut out);
        out
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    pub fn has_free_var(&self, x: &str) -> bool {
        self.free_vars().contains(x)
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Type::Top | Type::Base(_) => {}
            Type::Singleton(v) => collect_ground_free(v, bound, out),
            Type::ServerRef(s) | Type::Chan(s) => {
                s.tm.collect_free(bound, out);
                s.ta.collect_free(bound, out);
                s.tp.collect_free(bound, out);
            }
            Type::Record(fs) => fs.iter().for_each(|(_, t)| t.collect_free(bound, out)),
            Type::List(t) => t.collect_free(bound, out),
            Type::Arrow(a, b) | Type::App(a, b) | Type::Union(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Type::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Type::Forall(x, b, body) => {
                b.collect_free(bound, out);
                bound.push(x.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Type::Match(s, cases) => {
                s.collect_free(bound, out);
                for (p, c) in cases {
                    p.collect_free(bound, out);
                    c.collect_free(bound, out);
                }
            }
        }
    }

    /// All names (free or bound) appearing in the type.
    pub fn all_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Type::Top | Type::Base(_) | Type::Singleton(_) => {}
            Type::ServerRef(s) | Type::Chan(s) => {
                s.tm.all_names(out);
                s.ta.all_names(out);
                s.tp.all_names(out);
            }
            Type::Record(fs) => fs.iter().for_each(|(_, t)| t.all_names(out)),
            Type::List(t) => t.all_names(out),
            Type::Arrow(a, b) | Type::App(a, b) | Type::Union(a, b) => {
                a.all_names(out);
                b.all_names(out);
            }
            Type::Var(x) => {
                out.insert(x.clone());
            }
            Type::Forall(x, b, body) => {
                out.insert(x.clone());
                b.all_names(out);
                body.all_names(out);
            }
            Type::Match(s, cases) => {
                s.all_names(out);
                for (p, c) in cases {
                    p.all_names(out);
                    c.all_names(out);
                }
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Type::Top | Type::Base(_) | Type::Var(_) | Type::Singleton(_) => 1,
            Type::ServerRef(s) | Type::Chan(s) => 1 + s.tm.size() + s.ta.size() + s.tp.size(),
            Type::Record(fs) => 1 + fs.iter().map(|(_, t)| t.size()).sum::<usize>(),
            Type::List(t) => 1 + t.size(),
            Type::Arrow(a, b) | Type::App(a, b) | Type::Union(a, b) => 1 + a.size() + b.size(),
            Type::Forall(_, b, body) => 1 + b.size() + body.size(),
            Type::Match(s, cases) => {
                1 + s.size() + cases.iter().map(|(p, c)| p.size() + c.size()).sum::<usize>()
            }
        }
    }
}

fn collect_ground_free(v: &GroundValue, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match v {
        GroundValue::Addr { sig, .. } | GroundValue::Chan { sig, .. } => {
            sig.tm.collect_free(bound, out);
            sig.ta.collect_free(bound, out);
            sig.tp.collect_free(bound, out);
        }
        GroundValue::Cons(h, t) => {
            collect_ground_free(h, bound, out);
            collect_ground_free(t, bound, out);
        }
        GroundValue::Record(fs) => fs.iter().for_each(|(_, v)| collect_ground_free(v, bound, out)),
        _ => {}
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpKind {
    Connect,
    Read,
    Insert,
    Modify,
    Delete,
}

impl OpKind {
    pub const ALL: [OpKind; 5] = [OpKind::Connect, OpKind::Read, OpKind::Insert, OpKind::Modify, OpKind::Delete];

    pub fn name(self) -> &'static str {
        match self {
            OpKind::Connect => "Connect",
            OpKind::Read => "Read",
            OpKind::Insert => "Insert",
            OpKind::Modify => "Modify",
            OpKind::Delete => "Delete",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            OpKind::Connect => "connect",
            OpKind::Read => "read",
            OpKind::Insert => "insert",
            OpKind::Modify => "modify",
            OpKind::Delete => "delete",
        }
    }

    pub fn from_name(s: &str) -> Option<OpKind> {
        OpKind::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn arity(self) -> usize {
        if self == OpKind::Connect {
            1
        } else {
            2
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatchArm {
    pub var: Name,
    pub ty: Type,
    pub body: Term,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    /// An atomic ground literal. Composite ground values are spelled with
    /// `Cons` and `Record` nodes; see [`Term::from_ground`].
    Lit(GroundValue),
    Var(Name),
    Cons(Box<Term>, Box<Term>),
    Head(Box<Term>),
    Tail(Box<Term>),
    Record(Vec<(Name, Term)>),
    Field(Box<Term>, Name),
    Lam(Name, Type, Box<Term>),
    TLam(Name, Type, Box<Term>),
    App(Box<Term>, Box<Term>),
    TApp(Box<Term>, Type),
    Let(Name, Box<Term>, Box<Term>),
    Match(Box<Term>, Vec<MatchArm>),
    Op(OpKind, Vec<Term>),
}

impl Term {
    pub fn var(x: impl Into<String>) -> Term {
        Term::Var(x.into())
    }

    pub fn int(n: i64) -> Term {
        Term::Lit(GroundValue::Int(n))
    }

    pub fn str(s: impl Into<String>) -> Term {
        Term::Lit(GroundValue::Str(s.into()))
    }

    pub fn bool(b: bool) -> Term {
        Term::Lit(GroundValue::Bool(b))
    }

    pub fn unit() -> Term {
        Term::Lit(GroundValue::Unit)
    }

    pub fn nil() -> Term {
        Term::Lit(GroundValue::Nil)
    }

    pub fn bytes(b: impl Into<Vec<u8>>) -> Term {
        Term::Lit(GroundValue::Bytes(b.into()))
    }

    pub fn cons(h: Term, t: Term) -> Term {
        Term::Cons(Box::new(h), Box::new(t))
    }

    pub fn head(t: Term) -> Term {
        Term::Head(Box::new(t))
    }

    pub fn tail(t: Term) -> Term {
        Term::Tail(Box::new(t))
    }

    pub fn record<I, S>(fields: I) -> Term
    where
        I: IntoIterator<Item = (S, Term)>,
        S: Into<String>,
    {
        Term::Record(fields.into_iter().map(|(l, t)| (l.into(), t)).collect())
    }

    pub fn field(t: Term, l: impl Into<String>) -> Term {
        Term::Field(Box::new(t), l.into())
    }

    pub fn lam(x: impl Into<String>, ty: Type, body: Term) -> Term {
        Term::Lam(x.into(), ty, Box::new(body))
    }

    pub fn tlam(x: impl Into<String>, bound: Type, body: Term) -> Term {
        Term::TLam(x.into(), bound, Box::new(body))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn tapp(f: Term, t: Type) -> Term {
        Term::TApp(Box::new(f), t)
    }

    pub fn let_in(x: impl Into<String>, v: Term, body: Term) -> Term {
        Term::Let(x.into(), Box::new(v), Box::new(body))
    }

    pub fn match_on(s: Term, arms: Vec<MatchArm>) -> Term {
        Term::Match(Box::new(s), arms)
    }

    pub fn op(kind: OpKind, args: Vec<Term>) -> Term {
        Term::Op(kind, args)
    }

    /// Spell a ground value as a term, expanding lists and records into
    /// their term constructors.
    pub fn from_ground(v: &GroundValue) -> Term {
        match v {
            GroundValue::Cons(h, t) => Term::cons(Term::from_ground(h), Term::from_ground(t)),
            GroundValue::Record(fs) => {
                Term::Record(fs.iter().map(|(l, v)| (l.clone(), Term::from_ground(v))).collect())
            }
            other => Term::Lit(other.clone()),
        }
    }

    /// The ground value denoted by this term, if it is one.
    pub fn as_ground(&self) -> Option<GroundValue> {
        match self {
            Term::Lit(v) => Some(v.clone()),
            Term::Cons(h, t) => Some(GroundValue::Cons(Box::new(h.as_ground()?), Box::new(t.as_ground()?))),
            Term::Record(fs) => fs
                .iter()
                .map(|(l, t)| t.as_ground().map(|v| (l.clone(), v)))
                .collect::<Option<Vec<_>>>()
                .map(GroundValue::Record),
            _ => None,
        }
    }

    pub fn is_value(&self) -> bool {
        match self {
            Term::Lit(_) | Term::Lam(..) | Term::TLam(..) => true,
            Term::Cons(h, t) => h.is_value() && t.is_value(),
            Term::Record(fs) => fs.iter().all(|(_, t)| t.is_value()),
            _ => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Term::Lit(_) => {}
            Term::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Term::Cons(a, b) | Term::App(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Term::Head(t) | Term::Tail(t) | Term::Field(t, _) | Term::TApp(t, _) | Term::TLam(_, _, t) => {
                t.collect_free(bound, out)
            }
            Term::Record(fs) => fs.iter().for_each(|(_, t)| t.collect_free(bound, out)),
            Term::Lam(x, _, body) => {
                bound.push(x.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Term::Let(x, v, body) => {
                v.collect_free(bound, out);
                bound.push(x.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Term::Match(s, arms) => {
                s.collect_free(bound, out);
                for arm in arms {
                    bound.push(arm.var.clone());
                    arm.body.collect_free(bound, out);
                    bound.pop();
                }
            }
            Term::Op(_, args) => args.iter().for_each(|t| t.collect_free(bound, out)),
        }
    }

    /// Free type variables occurring in annotations and literals.
    pub fn free_type_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free_tv(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free_tv(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        let ty = |t: &Type, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>| t.collect_free(bound, out);
        match self {
            Term::Lit(v) => collect_ground_free(v, bound, out),
            Term::Var(_) => {}
            Term::Cons(a, b) | Term::App(a, b) => {
                a.collect_free_tv(bound, out);
                b.collect_free_tv(bound, out);
            }
            Term::Head(t) | Term::Tail(t) | Term::Field(t, _) => t.collect_free_tv(bound, out),
            Term::TApp(t, a) => {
                t.collect_free_tv(bound, out);
                ty(a, bound, out);
            }
            Term::Record(fs) => fs.iter().for_each(|(_, t)| t.collect_free_tv(bound, out)),
            Term::Lam(_, a, body) => {
                ty(a, bound, out);
                body.collect_free_tv(bound, out);
            }
            Term::TLam(x, b, body) => {
                ty(b, bound, out);
                bound.push(x.clone());
                body.collect_free_tv(bound, out);
                bound.pop();
            }
            Term::Let(_, v, body) => {
                v.collect_free_tv(bound, out);
                body.collect_free_tv(bound, out);
            }
            Term::Match(s, arms) => {
                s.collect_free_tv(bound, out);
                for arm in arms {
                    ty(&arm.ty, bound, out);
                    arm.body.collect_free_tv(bound, out);
                }
            }
            Term::Op(_, args) => args.iter().for_each(|t| t.collect_free_tv(bound, out)),
        }
    }

    /// Addresses and channels occurring in literals of the term.
    pub fn collect_refs(&self, out: &mut Vec<GroundValue>) {
        match self {
            Term::Lit(v) => {
                let mut refs = Vec::new();
                v.collect_refs(&mut refs);
                out.extend(refs.into_iter().cloned());
            }
            Term::Var(_) => {}
            Term::Cons(a, b) | Term::App(a, b) => {
                a.collect_refs(out);
                b.collect_refs(out);
            }
            Term::Head(t) | Term::Tail(t) | Term::Field(t, _) | Term::TApp(t, _) => t.collect_refs(out),
            Term::Lam(_, _, t) | Term::TLam(_, _, t) => t.collect_refs(out),
            Term::Record(fs) => fs.iter().for_each(|(_, t)| t.collect_refs(out)),
            Term::Let(_, v, body) => {
                v.collect_refs(out);
                body.collect_refs(out);
            }
            Term::Match(s, arms) => {
                s.collect_refs(out);
                arms.iter().for_each(|a| a.body.collect_refs(out));
            }
            Term::Op(_, args) => args.iter().for_each(|t| t.collect_refs(out)),
        }
    }
}

/// `base` if unused, otherwise `base` followed by the smallest number that
/// avoids every name in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Name>) -> Name {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "v" } else { stem };
    if !avoid.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{stem}{i}"))
        .find(|n| !avoid.contains(n))
        .expect("infinite supply of names")
}

/// Alpha-equivalence of types, ignoring record field order and comparing
/// singleton payloads semantically.
pub fn alpha_eq(a: &Type, b: &Type) -> bool {
    AlphaCx::default().eq(a, b)
}

#[derive(Default)]
struct AlphaCx {
    left: HashMap<Name, usize>,
    right: HashMap<Name, usize>,
    depth: usize,
}

impl AlphaCx {
    fn eq(&mut self, a: &Type, b: &Type) -> bool {
        match (a, b) {
            (Type::Top, Type::Top) => true,
            (Type::Base(x), Type::Base(y)) => x == y,
            (Type::Singleton(x), Type::Singleton(y)) => x.sem_eq(y),
            (Type::ServerRef(x), Type::ServerRef(y)) | (Type::Chan(x), Type::Chan(y)) => {
                self.eq(&x.tm, &y.tm) && self.eq(&x.ta, &y.ta) && self.eq(&x.tp, &y.tp)
            }
            (Type::Record(xs), Type::Record(ys)) => {
                xs.len() == ys.len()
                    && xs.iter().all(|(l, t)| match ys.iter().find(|(m, _)| m == l) {
                        Some((_, u)) => self.eq(t, u),
                        None => false,
                    })
            }
            (Type::List(x), Type::List(y)) => self.eq(x, y),
            (Type::Arrow(a1, b1), Type::Arrow(a2, b2))
            | (Type::App(a1, b1), Type::App(a2, b2))
            | (Type::Union(a1, b1), Type::Union(a2, b2)) => self.eq(a1, a2) && self.eq(b1, b2),
            (Type::Var(x), Type::Var(y)) => match (self.left.get(x), self.right.get(y)) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            },
            (Type::Forall(x, b1, t1), Type::Forall(y, b2, t2)) => {
                if !self.eq(b1, b2) {
                    return false;
                }
                let d = self.depth;
                self.depth += 1;
                let px = self.left.insert(x.clone(), d);
                let py = self.right.insert(y.clone(), d);
                let r = self.eq(t1, t2);
                restore(&mut self.left, x, px);
                restore(&mut self.right, y, py);
                self.depth -= 1;
                r
            }
            (Type::Match(s1, c1), Type::Match(s2, c2)) => {
                self.eq(s1, s2)
                    && c1.len() == c2.len()
                    && c1.iter().zip(c2).all(|((p1, k1), (p2, k2))| self.eq(p1, p2) && self.eq(k1, k2))
            }
            _ => false,
        }
    }
}

fn restore(map: &mut HashMap<Name, usize>, k: &str, prev: Option<usize>) {
    match prev {
        Some(v) => {
            map.insert(k.to_string(), v);
        }
        None => {
            map.remove(k);
        }
    }
}

/// Builders for the derived types `Option`, `TableEntry` and `P4Entity`.
pub mod sugar {
    use super::Type;

    /// `forall A. {some: A} | {none: Unit}`
    pub fn option_def() -> Type {
        Type::forall_top(
            "A",
            Type::union(
                Type::record([("some", Type::var("A"))]),
                Type::record([("none", Type::UNIT)]),
            ),
        )
    }

    /// `Option a` as a type application.
    pub fn option(a: Type) -> Type {
        Type::app(option_def(), a)
    }

    /// `Option a` already expanded.
    pub fn option_expanded(a: Type) -> Type {
        Type::union(Type::record([("some", a)]), Type::record([("none", Type::UNIT)]))
    }

    fn entry_binders(body: Type) -> Type {
        Type::forall_top(
            "Tm",
            Type::forall_top(
                "Ta",
                Type::forall_top(
                    "Tp",
                    Type::forall_top(
                        "Xn",
                        Type::forall("Xa", Type::app(Type::var("Ta"), Type::var("Xn")), body),
                    ),
                ),
            ),
        )
    }

    fn entry_record() -> Type {
        Type::record([
            ("name", Type::var("Xn")),
            ("matches", Type::app(Type::var("Tm"), Type::var("Xn"))),
            ("action", Type::var("Xa")),
            ("params", Type::app(Type::var("Tp"), Type::var("Xa"))),
        ])
    }

    /// `forall Tm Ta Tp Xn (Xa <: Ta Xn). {name: Xn, matches: Tm Xn, action: Xa, params: Tp Xa}`
    pub fn table_entry_def() -> Type {
        entry_binders(entry_record())
    }

    /// The entity union restricted to table entries, the only entity kind
    /// modelled; it has the same shape as [`table_entry_def`].
    pub fn p4entity_def() -> Type {
        entry_binders(entry_record())
    }

    pub fn table_entry(tm: Type, ta: Type, tp: Type, xn: Type, xa: Type) -> Type {
        Type::apply_all(table_entry_def(), [tm, ta, tp, xn, xa])
    }

    pub fn p4entity(tm: Type, ta: Type, tp: Type, xn: Type, xa: Type) -> Type {
        Type::apply_all(p4entity_def(), [tm, ta, tp, xn, xa])
    }
}
