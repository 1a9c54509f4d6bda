//! Normalization, subtyping, membership and disjointness.
//!
//! Public entry points normalize their inputs once; the `*_n` helpers
//! assume normalized arguments.

use std::cell::Cell;
use std::collections::BTreeSet;

use super::env::TypingEnv;
use crate::ast::{alpha_eq, fresh_name, ChanSig, GroundValue, Name, Type};
use crate::subst::subst_type_in_type;

pub const DEFAULT_FUEL: usize = 512;

const WITNESS_LIMIT: usize = 24;

/// Outcome of trying to pick a match-type case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseSelection {
    Case(usize),
    Stuck,
}

/// Holds the rewrite budget shared by one outermost normalization.
#[derive(Debug)]
pub struct Checker {
    fuel_limit: usize,
    fuel: Cell<usize>,
    depth: Cell<usize>,
    exhausted: Cell<bool>,
}

impl Default for Checker {
    fn default() -> Self {
        Checker::new(DEFAULT_FUEL)
    }
}

impl Checker {
    pub fn new(fuel_limit: usize) -> Self {
        Checker { fuel_limit, fuel: Cell::new(fuel_limit), depth: Cell::new(0), exhausted: Cell::new(false) }
    }

    pub fn fuel_limit(&self) -> usize {
        self.fuel_limit
    }

    /// Whether some normalization ran out of fuel since the last reset.
    pub fn exhausted(&self) -> bool {
        self.exhausted.get()
    }

    pub fn reset_exhausted(&self) {
        self.exhausted.set(false);
    }

    fn enter(&self) {
        if self.depth.get() == 0 {
            self.fuel.set(self.fuel_limit);
        }
        self.depth.set(self.depth.get() + 1);
    }

    fn leave(&self) {
        self.depth.set(self.depth.get() - 1);
    }

    fn consume(&self) -> bool {
        let f = self.fuel.get();
        if f == 0 {
            self.exhausted.set(true);
            false
        } else {
            self.fuel.set(f - 1);
            true
        }
    }

    // ---- normalization ----

    pub fn normalize(&self, env: &TypingEnv, t: &Type) -> Type {
        self.enter();
        let r = self.norm(env, t);
        self.leave();
        r
    }

    fn norm(&self, env: &TypingEnv, t: &Type) -> Type {
        match t {
            Type::Top | Type::Base(_) | Type::Var(_) | Type::Singleton(_) => t.clone(),
            Type::ServerRef(s) => Type::server_ref(self.norm_sig(env, s)),
            Type::Chan(s) => Type::chan(self.norm_sig(env, s)),
            Type::Record(fs) => Type::Record(fs.iter().map(|(l, t)| (l.clone(), self.norm(env, t))).collect()),
            Type::List(t) => Type::list(self.norm(env, t)),
            Type::Arrow(a, b) => Type::arrow(self.norm(env, a), self.norm(env, b)),
            Type::Union(a, b) => Type::union(self.norm(env, a), self.norm(env, b)),
            Type::Forall(x, b, body) => {
                let b = self.norm(env, b);
                let (x, body) = open_binder(env, x, body);
                let inner = env.with_tvar(x.clone(), b.clone());
                let body = self.norm(&inner, &body);
                Type::forall(x, b, body)
            }
            Type::App(f, a) => {
                let f = self.norm(env, f);
                let a = self.norm(env, a);
                if let Type::Forall(x, bound, body) = &f {
                    if self.sub_n(env, &a, bound) && self.consume() {
                        let r = subst_type_in_type(body, x, &a);
                        return self.norm(env, &r);
                    }
                }
                Type::app(f, a)
            }
            Type::Match(s, cases) => {
                let s = self.norm(env, s);
                let cases: Vec<(Type, Type)> = cases.iter().map(|(p, c)| (self.norm(env, p), c.clone())).collect();
                match self.select_case(env, &s, &cases) {
                    CaseSelection::Case(k) if self.consume() => self.norm(env, &cases[k].1),
                    _ => Type::match_type(s, cases.into_iter().map(|(p, c)| (p, self.norm(env, &c))).collect()),
                }
            }
        }
    }

    fn norm_sig(&self, env: &TypingEnv, s: &ChanSig) -> ChanSig {
        ChanSig::new(self.norm(env, &s.tm), self.norm(env, &s.ta), self.norm(env, &s.tp))
    }

    /// First case whose pattern contains the scrutinee, provided every earlier
    /// pattern is provably disjoint from it. Arguments must be normalized.
    pub fn select_case(&self, env: &TypingEnv, s: &Type, cases: &[(Type, Type)]) -> CaseSelection {
        for (k, (p, _)) in cases.iter().enumerate() {
            if self.sub_n(env, s, p) {
                return CaseSelection::Case(k);
            }
            if !self.disjoint_n(env, s, p) {
                return CaseSelection::Stuck;
            }
        }
        CaseSelection::Stuck
    }

    // ---- subtyping ----

    pub fn subtype(&self, env: &TypingEnv, s: &Type, t: &Type) -> bool {
        self.enter();
        let s = self.norm(env, s);
        let t = self.norm(env, t);
        let r = self.sub_n(env, &s, &t);
        self.leave();
        r
    }

    pub(crate) fn sub_n(&self, env: &TypingEnv, s: &Type, t: &Type) -> bool {
        if matches!(t, Type::Top) || alpha_eq(s, t) {
            return true;
        }
        match s {
            Type::Union(a, b) => return self.sub_n(env, a, t) && self.sub_n(env, b, t),
            Type::Singleton(v) => return self.member_n(env, v, t),
            // A stuck match type is bounded by the join of its continuations.
            Type::Match(_, cases) if cases.iter().all(|(_, k)| self.sub_n(env, &self.norm(env, k), t)) => {
                return true;
            }
            Type::Var(x) => {
                return match env.lookup_tvar(x) {
                    Some(bound) => {
                        let bound = self.norm(env, bound);
                        self.sub_n(env, &bound, t)
                    }
                    None => false,
                }
            }
            _ => {}
        }
        if let Type::Union(..) = t {
            return t.union_parts().into_iter().any(|p| self.sub_n(env, s, p));
        }
        match (s, t) {
            (Type::Base(a), Type::Base(b)) => a == b,
            (Type::List(a), Type::List(b)) => self.sub_n(env, a, b),
            (Type::Record(fs), Type::Record(gs)) => {
                fs.len() == gs.len()
                    && gs.iter().all(|(l, u)| match fs.iter().find(|(m, _)| m == l) {
                        Some((_, t)) => self.sub_n(env, t, u),
                        None => false,
                    })
            }
            (Type::Arrow(a1, b1), Type::Arrow(a2, b2)) => self.sub_n(env, a2, a1) && self.sub_n(env, b1, b2),
            (Type::Forall(x, b1, t1), Type::Forall(y, b2, t2)) => {
                if !self.sub_n(env, b2, b1) {
                    return false;
                }
                let mut avoid = env.tvar_names();
                s.all_names(&mut avoid);
                t.all_names(&mut avoid);
                let z = fresh_name(x, &avoid);
                let inner = env.with_tvar(z.clone(), (**b2).clone());
                let zt = Type::Var(z);
                let t1 = self.norm(&inner, &subst_type_in_type(t1, x, &zt));
                let t2 = self.norm(&inner, &subst_type_in_type(t2, y, &zt));
                self.sub_n(&inner, &t1, &t2)
            }
            (Type::ServerRef(a), Type::ServerRef(b)) | (Type::Chan(a), Type::Chan(b)) => a.alpha_eq(b),
            (Type::Match(s1, c1), Type::Match(s2, c2)) => {
                let covariant = c1.len() == c2.len()
                    && c1.iter().zip(c2).all(|((p1, _), (p2, _))| alpha_eq(p1, p2))
                    && self.sub_n(env, s1, s2)
                    && c1.iter().zip(c2).all(|((_, k1), (_, k2))| self.sub_n(env, k1, k2));
                covariant || self.sub_residual_match(env, s, s2, c2)
            }
            (_, Type::Match(s2, c2)) => self.sub_residual_match(env, s, s2, c2),
            _ => false,
        }
    }

    /// `s <: S match {..}` when some ground witness `w` of `S` makes
    /// `<w> match {..}` reduce to a continuation above `s`.
    fn sub_residual_match(&self, env: &TypingEnv, s: &Type, scrut: &Type, cases: &[(Type, Type)]) -> bool {
        self.witnesses(env, scrut, cases, None).into_iter().any(|w| match self.reduce_on(env, &w, cases) {
            Some(r) => self.sub_n(env, s, &r),
            None => false,
        })
    }

    fn reduce_on(&self, env: &TypingEnv, w: &GroundValue, cases: &[(Type, Type)]) -> Option<Type> {
        match self.select_case(env, &Type::singleton(w.clone()), cases) {
            CaseSelection::Case(k) => Some(self.norm(env, &cases[k].1)),
            CaseSelection::Stuck => None,
        }
    }

    /// Candidate ground values of `scrut` drawn from canonical inhabitants of
    /// the scrutinee and the case patterns.
    fn witnesses(
        &self,
        env: &TypingEnv,
        scrut: &Type,
        cases: &[(Type, Type)],
        extra: Option<&GroundValue>,
    ) -> Vec<GroundValue> {
        let mut cands: Vec<GroundValue> = extra.into_iter().cloned().collect();
        for (p, _) in cases {
            cands.extend(inhabitants(p, WITNESS_LIMIT));
        }
        cands.extend(inhabitants(scrut, WITNESS_LIMIT));
        let mut out: Vec<GroundValue> = Vec::new();
        for c in cands {
            if out.iter().any(|o| o.sem_eq(&c)) {
                continue;
            }
            if self.member_n(env, &c, scrut) {
                out.push(c);
            }
        }
        out
    }

    // ---- membership ----

    pub fn member_of(&self, env: &TypingEnv, v: &GroundValue, t: &Type) -> bool {
        self.enter();
        let t = self.norm(env, t);
        let r = self.member_n(env, v, &t);
        self.leave();
        r
    }

    pub(crate) fn member_n(&self, env: &TypingEnv, v: &GroundValue, t: &Type) -> bool {
        use crate::ast::BaseType as B;
        match (t, v) {
            (Type::Top, _) => true,
            (Type::Base(B::Int), GroundValue::Int(_))
            | (Type::Base(B::Bool), GroundValue::Bool(_))
            | (Type::Base(B::Unit), GroundValue::Unit)
            | (Type::Base(B::String), GroundValue::Str(_))
            | (Type::Base(B::Bytes), GroundValue::Bytes(_)) => true,
            (Type::List(_), GroundValue::Nil) => true,
            (Type::List(e), GroundValue::Cons(h, tl)) => self.member_n(env, h, e) && self.member_n(env, tl, t),
            (Type::Record(fs), GroundValue::Record(_)) => fs.iter().all(|(l, ft)| match v.field(l) {
                Some(fv) => self.member_n(env, fv, ft),
                None => false,
            }),
            (Type::ServerRef(sig), GroundValue::Addr { sig: vs, .. })
            | (Type::Chan(sig), GroundValue::Chan { sig: vs, .. }) => {
                vs.alpha_eq(sig) || self.norm_sig(env, vs).alpha_eq(sig)
            }
            (Type::Singleton(w), _) => v.sem_eq(w),
            (Type::Union(a, b), _) => self.member_n(env, v, a) || self.member_n(env, v, b),
            (Type::Match(scrut, cases), _) => self
                .witnesses(env, scrut, cases, Some(v))
                .into_iter()
                .any(|w| self.reduce_on(env, &w, cases).is_some_and(|r| self.member_n(env, v, &r))),
            _ => false,
        }
    }

    // ---- disjointness ----

    pub fn disjoint(&self, env: &TypingEnv, s: &Type, t: &Type) -> bool {
        self.enter();
        let s = self.norm(env, s);
        let t = self.norm(env, t);
        let r = self.disjoint_n(env, &s, &t);
        self.leave();
        r
    }

    pub(crate) fn disjoint_n(&self, env: &TypingEnv, s: &Type, t: &Type) -> bool {
        if matches!(s, Type::Union(..)) || matches!(t, Type::Union(..)) {
            return s
                .union_parts()
                .into_iter()
                .all(|a| t.union_parts().into_iter().all(|b| self.disjoint_n(env, a, b)));
        }
        match (s, t) {
            (Type::Singleton(v), Type::Singleton(w)) => !v.sem_eq(w),
            (Type::Singleton(v), other) | (other, Type::Singleton(v)) => {
                decidable_membership(other) && !self.member_n(env, v, other)
            }
            (Type::Top, _) | (_, Type::Top) => false,
            (Type::Base(a), Type::Base(b)) => a != b,
            (Type::Record(fs), Type::Record(gs)) => fs.iter().any(|(l, a)| {
                gs.iter().find(|(m, _)| m == l).is_some_and(|(_, b)| self.disjoint_n(env, a, b))
            }),
            _ => match (head(s), head(t)) {
                (Some(a), Some(b)) => a != b,
                _ => false,
            },
        }
    }

    // ---- shapes at elimination sites ----

    /// Normalized type with variables replaced by their bounds and singleton
    /// records, addresses and channels turned into structural types.
    pub fn expose(&self, env: &TypingEnv, t: &Type) -> Type {
        let t = self.normalize(env, t);
        self.expose_n(env, t, 0)
    }

    fn expose_n(&self, env: &TypingEnv, t: Type, depth: usize) -> Type {
        match t {
            Type::Var(ref x) if depth < 64 => match env.lookup_tvar(x) {
                Some(b) => {
                    let b = self.normalize(env, b);
                    self.expose_n(env, b, depth + 1)
                }
                None => t,
            },
            Type::Singleton(v) => match *v {
                GroundValue::Record(fs) => {
                    Type::Record(fs.into_iter().map(|(l, v)| (l, Type::singleton(v))).collect())
                }
                GroundValue::Addr { sig, .. } => Type::ServerRef(sig),
                GroundValue::Chan { sig, .. } => Type::Chan(sig),
                other => Type::singleton(other),
            },
            other => other,
        }
    }
}

/// Rename a binder that clashes with the environment.
pub(crate) fn open_binder(env: &TypingEnv, x: &Name, body: &Type) -> (Name, Type) {
    if !env.has_tvar(x) {
        return (x.clone(), body.clone());
    }
    let mut avoid: BTreeSet<Name> = env.tvar_names();
    body.all_names(&mut avoid);
    let z = fresh_name(x, &avoid);
    let body = subst_type_in_type(body, x, &Type::Var(z.clone()));
    (z, body)
}

#[derive(PartialEq, Eq, Clone, Copy)]
enum Head {
    Base(crate::ast::BaseType),
    Record,
    List,
    Arrow,
    Forall,
    Chan,
    ServerRef,
}

fn head(t: &Type) -> Option<Head> {
    Some(match t {
        Type::Base(b) => Head::Base(*b),
        Type::Record(_) => Head::Record,
        Type::List(_) => Head::List,
        Type::Arrow(..) => Head::Arrow,
        Type::Forall(..) => Head::Forall,
        Type::Chan(_) => Head::Chan,
        Type::ServerRef(_) => Head::ServerRef,
        _ => return None,
    })
}

/// Whether `member_n` is exact for this normalized type: no free or stuck
/// components where membership could be underapproximated.
fn decidable_membership(t: &Type) -> bool {
    match t {
        Type::Top | Type::Base(_) | Type::Singleton(_) | Type::Arrow(..) | Type::Forall(..) => true,
        Type::Record(fs) => fs.iter().all(|(_, t)| decidable_membership(t)),
        Type::List(t) => decidable_membership(t),
        Type::Union(a, b) => decidable_membership(a) && decidable_membership(b),
        Type::Var(_) | Type::App(..) | Type::Match(..) | Type::Chan(_) | Type::ServerRef(_) => false,
    }
}

/// A bounded list of canonical ground inhabitants of a normalized type.
pub fn inhabitants(t: &Type, limit: usize) -> Vec<GroundValue> {
    use crate::ast::BaseType as B;
    let mut out = match t {
        Type::Top | Type::Base(B::Unit) => vec![GroundValue::Unit],
        Type::Base(B::Int) => vec![GroundValue::Int(0)],
        Type::Base(B::Bool) => vec![GroundValue::Bool(true), GroundValue::Bool(false)],
        Type::Base(B::String) => vec![GroundValue::Str(String::new())],
        Type::Base(B::Bytes) => vec![GroundValue::Bytes(Vec::new())],
        Type::List(_) => vec![GroundValue::Nil],
        Type::Singleton(v) => vec![(**v).clone()],
        Type::Union(a, b) => {
            let mut v = inhabitants(a, limit);
            v.extend(inhabitants(b, limit));
            v
        }
        Type::Record(fs) => {
            let mut acc: Vec<Vec<(Name, GroundValue)>> = vec![Vec::new()];
            for (l, ft) in fs {
                let opts = inhabitants(ft, limit);
                let mut next = Vec::new();
                for prefix in &acc {
                    for o in &opts {
                        if next.len() >= limit {
                            break;
                        }
                        let mut p = prefix.clone();
                        p.push((l.clone(), o.clone()));
                        next.push(p);
                    }
                }
                acc = next;
            }
            acc.into_iter().map(GroundValue::Record).collect()
        }
        Type::ServerRef(sig) => vec![GroundValue::Addr { name: String::new(), sig: sig.clone() }],
        Type::Chan(sig) => vec![GroundValue::Chan {
            id: crate::ast::ChannelId { server: String::new(), index: 0 },
            sig: sig.clone(),
        }],
        _ => Vec::new(),
    };
    out.truncate(limit);
    out
}
