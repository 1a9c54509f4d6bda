use std::collections::BTreeSet;

use super::env::{Binding, TypingEnv};
use super::relations::{open_binder, Checker};
use super::{TypeError, TypeErrorKind as K};
use crate::ast::{fresh_name, sugar, ChanSig, GroundValue, Name, OpKind, Term, Type, WILDCARD};
use crate::subst::{subst_term, subst_type_in_term, subst_type_in_type};

type Res<T> = Result<T, TypeError>;

impl Checker {
    pub fn env_valid(&self, env: &TypingEnv) -> bool {
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for (i, b) in env.bindings().enumerate() {
            let (x, t) = match b {
                Binding::Term(x, t) | Binding::TypeVar(x, t) => (x, t),
            };
            if !seen.insert(x.as_str()) || !self.type_valid(&env.prefix(i), t) {
                return false;
            }
        }
        true
    }

    pub fn type_valid(&self, env: &TypingEnv, t: &Type) -> bool {
        match t {
            Type::Top | Type::Base(_) => true,
            Type::Singleton(v) => {
                let mut refs = Vec::new();
                v.collect_refs(&mut refs);
                refs.iter().all(|r| match r {
                    GroundValue::Addr { sig, .. } | GroundValue::Chan { sig, .. } => self.sig_valid(env, sig),
                    _ => true,
                })
            }
            Type::Var(x) => env.has_tvar(x),
            Type::ServerRef(s) | Type::Chan(s) => self.sig_valid(env, s),
            Type::Record(fs) => {
                let labels: BTreeSet<&Name> = fs.iter().map(|(l, _)| l).collect();
                labels.len() == fs.len() && fs.iter().all(|(_, t)| self.type_valid(env, t))
            }
            Type::List(t) => self.type_valid(env, t),
            Type::Arrow(a, b) | Type::Union(a, b) => self.type_valid(env, a) && self.type_valid(env, b),
            Type::Forall(x, b, body) => {
                if !self.type_valid(env, b) {
                    return false;
                }
                let (x, body) = open_binder(env, x, body);
                self.type_valid(&env.with_tvar(x, (**b).clone()), &body)
            }
            Type::App(f, a) => {
                if !self.type_valid(env, f) || !self.type_valid(env, a) {
                    return false;
                }
                // A variable in head position stands for a type operator
                // parameter, as in the table-entry abbreviation.
                if matches!(&**f, Type::Var(_)) {
                    return true;
                }
                match self.normalize(env, f) {
                    Type::Forall(_, bound, _) => self.subtype(env, a, &bound),
                    _ => false,
                }
            }
            Type::Match(s, cases) => {
                !cases.is_empty()
                    && self.type_valid(env, s)
                    && cases.iter().all(|(p, c)| self.type_valid(env, p) && self.type_valid(env, c))
            }
        }
    }

    fn sig_valid(&self, env: &TypingEnv, s: &ChanSig) -> bool {
        self.type_valid(env, &s.tm) && self.type_valid(env, &s.ta) && self.type_valid(env, &s.tp)
    }

    /// Synthesize the type of `t`, reporting fuel exhaustion as an error.
    pub fn typecheck(&self, env: &TypingEnv, t: &Term) -> Res<Type> {
        self.reset_exhausted();
        let r = self.ty(env, t);
        if self.exhausted() {
            return Err(TypeError::new(K::NormalizationFuelExhausted, "type normalization"));
        }
        r
    }

    fn valid_or_err(&self, env: &TypingEnv, t: &Type, loc: &str) -> Res<()> {
        if self.type_valid(env, t) {
            Ok(())
        } else {
            Err(TypeError::new(K::InvalidType, loc).with_actual(t.clone()))
        }
    }

    fn ty(&self, env: &TypingEnv, t: &Term) -> Res<Type> {
        if let Some(v) = t.as_ground() {
            return Ok(Type::singleton(v));
        }
        match t {
            Term::Lit(v) => Ok(Type::singleton(v.clone())),
            Term::Var(x) => env
                .lookup_term(x)
                .cloned()
                .ok_or_else(|| TypeError::new(K::UnknownVariable, format!("variable `{x}`"))),
            Term::Cons(h, tl) => {
                let th = self.ty(env, h)?;
                let ttl = self.ty(env, tl)?;
                match self.list_elem(env, &ttl) {
                    Some(None) => Ok(Type::list(th)),
                    Some(Some(c)) => Ok(Type::list(self.join(env, th, c))),
                    None => Err(TypeError::new(K::NotSubtype, "list tail")
                        .with_expected(Type::list(Type::Top))
                        .with_actual(ttl)),
                }
            }
            Term::Head(a) | Term::Tail(a) => {
                let is_head = matches!(t, Term::Head(_));
                let ta = self.ty(env, a)?;
                let exposed = self.expose(env, &ta);
                if let Type::Singleton(v) = &exposed {
                    match &**v {
                        GroundValue::Nil => return Ok(none_record()),
                        GroundValue::Cons(h, tl) => {
                            let part = if is_head { h } else { tl };
                            return Ok(Type::record([("some", Type::singleton((**part).clone()))]));
                        }
                        _ => {}
                    }
                }
                match self.list_elem(env, &ta) {
                    Some(None) => Ok(none_record()),
                    Some(Some(c)) => Ok(sugar::option_expanded(if is_head { c } else { Type::list(c) })),
                    None => Err(TypeError::new(K::NotSubtype, if is_head { "head argument" } else { "tail argument" })
                        .with_expected(Type::list(Type::Top))
                        .with_actual(ta)),
                }
            }
            Term::Record(fs) => {
                let mut out = Vec::with_capacity(fs.len());
                for (l, ft) in fs {
                    if out.iter().any(|(m, _): &(Name, Type)| m == l) {
                        return Err(TypeError::new(K::InvalidType, format!("duplicate record label `{l}`")));
                    }
                    out.push((l.clone(), self.ty(env, ft)?));
                }
                Ok(Type::Record(out))
            }
            Term::Field(a, l) => {
                let ta = self.ty(env, a)?;
                self.project(env, &ta, l)
            }
            Term::Lam(x, a, body) => {
                self.valid_or_err(env, a, &format!("annotation of `{x}`"))?;
                let (x, body) = rename_term_binder(env, x, body);
                let tb = self.ty(&env.with_term(x, a.clone()), &body)?;
                Ok(Type::arrow(a.clone(), tb))
            }
            Term::TLam(x, b, body) => {
                self.valid_or_err(env, b, &format!("bound of `{x}`"))?;
                let (x, body) = rename_type_binder(env, x, body);
                let tb = self.ty(&env.with_tvar(x.clone(), b.clone()), &body)?;
                Ok(Type::forall(x, b.clone(), tb))
            }
            Term::App(f, a) => {
                let tf = self.ty(env, f)?;
                let ta = self.ty(env, a)?;
                match self.expose(env, &tf) {
                    Type::Arrow(p, r) => {
                        if self.subtype(env, &ta, &p) {
                            Ok(*r)
                        } else {
                            Err(TypeError::new(K::NotSubtype, "function argument").with_expected(*p).with_actual(ta))
                        }
                    }
                    other => Err(TypeError::new(K::NotSubtype, "applied term")
                        .with_expected(Type::arrow(ta, Type::Top))
                        .with_actual(other)),
                }
            }
            Term::TApp(f, a) => {
                self.valid_or_err(env, a, "type argument")?;
                let tf = self.ty(env, f)?;
                match self.expose(env, &tf) {
                    Type::Forall(x, b, body) => {
                        if self.subtype(env, a, &b) {
                            Ok(self.normalize(env, &subst_type_in_type(&body, &x, a)))
                        } else {
                            Err(TypeError::new(K::NotSubtype, "type argument").with_expected(*b).with_actual(a.clone()))
                        }
                    }
                    other => Err(TypeError::new(K::NotSubtype, "type-applied term")
                        .with_expected(Type::forall_top("X", Type::Top))
                        .with_actual(other)),
                }
            }
            Term::Let(x, v, body) => {
                let tv = self.ty(env, v)?;
                let (x, body) = rename_term_binder(env, x, body);
                self.ty(&env.with_term(x, tv), &body)
            }
            Term::Match(s, arms) => {
                if arms.is_empty() {
                    return Err(TypeError::new(K::NotExhaustive, "match with no cases"));
                }
                let ts = self.ty(env, s)?;
                let mut cases = Vec::with_capacity(arms.len());
                for arm in arms {
                    self.valid_or_err(env, &arm.ty, &format!("pattern type of `{}`", arm.var))?;
                    let (x, body) = rename_term_binder(env, &arm.var, &arm.body);
                    let tb = self.ty(&env.with_term(x, arm.ty.clone()), &body)?;
                    cases.push((arm.ty.clone(), tb));
                }
                let all = Type::union_of(cases.iter().map(|(p, _)| p.clone())).expect("non-empty");
                if !self.subtype(env, &ts, &all) {
                    return Err(TypeError::new(K::NotExhaustive, "match scrutinee").with_expected(all).with_actual(ts));
                }
                Ok(self.normalize(env, &Type::match_type(ts, cases)))
            }
            Term::Op(kind, args) => self.op(env, *kind, args),
        }
    }

    /// Element type of a list type: `Some(None)` for the empty list.
    fn list_elem(&self, env: &TypingEnv, t: &Type) -> Option<Option<Type>> {
        let n = self.normalize(env, t);
        let mut acc: Option<Type> = None;
        for part in n.union_parts() {
            let elem = match self.expose(env, part) {
                Type::List(c) => Some(*c),
                Type::Singleton(v) => match v.list_items() {
                    Some(items) => Type::union_of(items.into_iter().map(|i| Type::singleton(i.clone()))),
                    None => return None,
                },
                _ => return None,
            };
            acc = match (acc, elem) {
                (a, None) => a,
                (None, e) => e,
                (Some(a), Some(e)) => Some(self.join(env, a, e)),
            };
        }
        Some(acc)
    }

    fn join(&self, env: &TypingEnv, a: Type, c: Type) -> Type {
        if self.subtype(env, &a, &c) {
            c
        } else if self.subtype(env, &c, &a) {
            a
        } else {
            Type::union(a, c)
        }
    }

    fn project(&self, env: &TypingEnv, t: &Type, l: &str) -> Res<Type> {
        let n = self.normalize(env, t);
        let mut out: Vec<Type> = Vec::new();
        for part in n.union_parts() {
            match self.expose(env, part) {
                Type::Record(fs) => match fs.into_iter().find(|(m, _)| m == l) {
                    Some((_, ft)) => out.push(ft),
                    None => {
                        return Err(TypeError::new(K::FieldMissing, format!("field `{l}`")).with_actual(part.clone()))
                    }
                },
                other => {
                    return Err(TypeError::new(K::NotSubtype, format!("projection `.{l}`"))
                        .with_expected(Type::record([(l, Type::Top)]))
                        .with_actual(other))
                }
            }
        }
        Ok(Type::union_of(out).expect("non-empty union"))
    }

    fn op(&self, env: &TypingEnv, kind: OpKind, args: &[Term]) -> Res<Type> {
        if args.len() != kind.arity() {
            return Err(TypeError::new(K::OpArgMismatch, format!("{} arity", kind.name())));
        }
        let loc = kind.name();
        let t0 = self.ty(env, &args[0])?;
        if kind == OpKind::Connect {
            return match self.expose(env, &t0) {
                Type::ServerRef(sig) => Ok(Type::Chan(sig)),
                other => Err(TypeError::new(K::OpArgMismatch, format!("{loc} address"))
                    .with_expected(Type::server_ref(abstract_sig()))
                    .with_actual(other)),
            };
        }
        let sig = match self.expose(env, &t0) {
            Type::Chan(sig) => *sig,
            other => {
                return Err(TypeError::new(K::OpArgMismatch, format!("{loc} channel"))
                    .with_expected(Type::chan(abstract_sig()))
                    .with_actual(other))
            }
        };
        let te = self.ty(env, &args[1])?;
        let insts = self.check_entity(env, &sig, &te, loc)?;
        if kind == OpKind::Read {
            Ok(Type::list(self.read_result(env, &sig, &insts)))
        } else {
            Ok(Type::BOOL)
        }
    }

    /// Check an entity argument against the table-entry type of a channel,
    /// returning the `(Xn, Xa)` instantiation chosen for each union part.
    fn check_entity(&self, env: &TypingEnv, sig: &ChanSig, te: &Type, loc: &str) -> Res<Vec<(Type, Type)>> {
        let n = self.normalize(env, te);
        let mut insts = Vec::new();
        for part in n.union_parts() {
            let exposed = self.expose(env, part);
            let fields = match &exposed {
                Type::Record(fs) => fs,
                other => {
                    return Err(TypeError::new(K::OpArgMismatch, format!("{loc} entity"))
                        .with_expected(Type::record([("name", Type::Top), ("action", Type::Top)]))
                        .with_actual(other.clone()))
                }
            };
            let field = |l: &str| -> Res<Type> {
                fields
                    .iter()
                    .find(|(m, _)| m == l)
                    .map(|(_, t)| t.clone())
                    .ok_or_else(|| TypeError::new(K::FieldMissing, format!("{loc} entity field `{l}`")).with_actual(exposed.clone()))
            };
            let xn = field("name")?;
            let xa = field("action")?;
            let bound = self.normalize(env, &Type::app(sig.ta.clone(), xn.clone()));
            if let Type::Match(..) | Type::App(..) = bound {
                return Err(TypeError::new(K::NoMatchCase, format!("{loc} entity field `name`")).with_actual(xn));
            }
            if !self.subtype(env, &xa, &bound) {
                return Err(TypeError::new(K::NotSubtype, format!("{loc} entity field `action`"))
                    .with_expected(bound)
                    .with_actual(xa));
            }
            let inst = self.normalize(
                env,
                &sugar::p4entity(sig.tm.clone(), sig.ta.clone(), sig.tp.clone(), xn.clone(), xa.clone()),
            );
            let ok = match part {
                Type::Singleton(v) => self.member_of(env, v, &inst),
                _ => self.subtype(env, part, &inst),
            };
            if !ok {
                return Err(self.entity_mismatch(env, &exposed, &inst, part, loc));
            }
            insts.push((xn, xa));
        }
        Ok(insts)
    }

    fn entity_mismatch(&self, env: &TypingEnv, exposed: &Type, inst: &Type, part: &Type, loc: &str) -> TypeError {
        if let (Type::Record(have), Type::Record(want)) = (exposed, inst) {
            for (l, wt) in want {
                match have.iter().find(|(m, _)| m == l) {
                    None => {
                        return TypeError::new(K::FieldMissing, format!("{loc} entity field `{l}`"))
                            .with_expected(wt.clone())
                            .with_actual(exposed.clone())
                    }
                    Some((_, ht)) if !self.subtype(env, ht, wt) => {
                        return TypeError::new(K::NotSubtype, format!("{loc} entity field `{l}`"))
                            .with_expected(wt.clone())
                            .with_actual(ht.clone())
                    }
                    _ => {}
                }
            }
        }
        TypeError::new(K::NotSubtype, format!("{loc} entity")).with_expected(inst.clone()).with_actual(part.clone())
    }

    /// Element type of a read result: the table entries of every table and
    /// action the query can select, or the literal instantiation when the
    /// channel signature cannot be enumerated.
    fn read_result(&self, env: &TypingEnv, sig: &ChanSig, insts: &[(Type, Type)]) -> Type {
        let wild = Type::wildcard();
        let tables = self.case_names(env, &sig.ta);
        let mut parts: Vec<Type> = Vec::new();
        for (xn, xa) in insts {
            let mut found = Vec::new();
            if let Some(tables) = &tables {
                let any_table = self.subtype(env, &wild, xn);
                for t in tables {
                    let tt = Type::str_singleton(t.clone());
                    if !any_table && !self.subtype(env, &tt, xn) {
                        continue;
                    }
                    let actions = self.normalize(env, &Type::app(sig.ta.clone(), tt.clone()));
                    let any_action = self.subtype(env, &wild, xa);
                    for a in actions.union_parts() {
                        let is_name = matches!(a, Type::Singleton(v) if matches!(&**v, GroundValue::Str(s) if s != WILDCARD));
                        if !is_name || !(any_action || self.subtype(env, a, xa)) {
                            continue;
                        }
                        found.push(self.normalize(
                            env,
                            &sugar::p4entity(sig.tm.clone(), sig.ta.clone(), sig.tp.clone(), tt.clone(), a.clone()),
                        ));
                    }
                }
            }
            if found.is_empty() {
                found.push(self.normalize(
                    env,
                    &sugar::p4entity(sig.tm.clone(), sig.ta.clone(), sig.tp.clone(), xn.clone(), xa.clone()),
                ));
            }
            for f in found {
                if !parts.iter().any(|p| crate::ast::alpha_eq(p, &f)) {
                    parts.push(f);
                }
            }
        }
        Type::union_of(parts).unwrap_or(Type::Top)
    }

    /// Non-wildcard string patterns of a `forall X. X match {..}` type.
    fn case_names(&self, env: &TypingEnv, t: &Type) -> Option<Vec<String>> {
        match self.normalize(env, t) {
            Type::Forall(x, _, body) => match *body {
                Type::Match(s, cases) if *s == Type::Var(x) => Some(
                    cases
                        .iter()
                        .filter_map(|(p, _)| match p {
                            Type::Singleton(v) => match &**v {
                                GroundValue::Str(s) if s != WILDCARD => Some(s.clone()),
                                _ => None,
                            },
                            _ => None,
                        })
                        .collect(),
                ),
                _ => None,
            },
            _ => None,
        }
    }
}

fn none_record() -> Type {
    Type::record([("none", Type::UNIT)])
}

fn abstract_sig() -> ChanSig {
    ChanSig::new(Type::var("Tm"), Type::var("Ta"), Type::var("Tp"))
}

fn rename_term_binder(env: &TypingEnv, x: &Name, body: &Term) -> (Name, Term) {
    if !env.has_term(x) {
        return (x.clone(), body.clone());
    }
    let mut avoid = env.term_names();
    avoid.extend(body.free_vars());
    let z = fresh_name(x, &avoid);
    let body = subst_term(body, x, &Term::Var(z.clone()));
    (z, body)
}

fn rename_type_binder(env: &TypingEnv, x: &Name, body: &Term) -> (Name, Term) {
    if !env.has_tvar(x) {
        return (x.clone(), body.clone());
    }
    let mut avoid = env.tvar_names();
    avoid.extend(body.free_type_vars());
    let z = fresh_name(x, &avoid);
    let body = subst_type_in_term(body, x, &Type::Var(z.clone()));
    (z, body)
}
