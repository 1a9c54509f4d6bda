//! Capture-avoiding substitution of terms into terms, types into terms and
//! types into types. Ground literals and singleton types are left untouched.

use std::collections::BTreeSet;

use crate::ast::{fresh_name, MatchArm, Name, Term, Type};

/// `t[x := v]`.
pub fn subst_term(t: &Term, x: &str, v: &Term) -> Term {
    let fv = v.free_vars();
    let ftv = v.free_type_vars();
    SubstTerm { x, v, fv: &fv, ftv: &ftv }.go(t)
}

struct SubstTerm<'a> {
    x: &'a str,
    v: &'a Term,
    fv: &'a BTreeSet<Name>,
    ftv: &'a BTreeSet<Name>,
}

impl SubstTerm<'_> {
    fn go(&self, t: &Term) -> Term {
        match t {
            Term::Lit(_) => t.clone(),
            Term::Var(y) if y == self.x => self.v.clone(),
            Term::Var(_) => t.clone(),
            Term::Cons(a, b) => Term::cons(self.go(a), self.go(b)),
            Term::Head(a) => Term::head(self.go(a)),
            Term::Tail(a) => Term::tail(self.go(a)),
            Term::Record(fs) => Term::Record(fs.iter().map(|(l, t)| (l.clone(), self.go(t))).collect()),
            Term::Field(a, l) => Term::field(self.go(a), l.clone()),
            Term::App(a, b) => Term::app(self.go(a), self.go(b)),
            Term::TApp(a, ty) => Term::tapp(self.go(a), ty.clone()),
            Term::Op(k, args) => Term::Op(*k, args.iter().map(|a| self.go(a)).collect()),
            Term::Lam(y, ty, body) => {
                let (y, body) = self.under_binder(y, body);
                Term::Lam(y, ty.clone(), Box::new(body))
            }
            Term::Let(y, a, body) => {
                let a = self.go(a);
                let (y, body) = self.under_binder(y, body);
                Term::Let(y, Box::new(a), Box::new(body))
            }
            Term::Match(s, arms) => Term::Match(
                Box::new(self.go(s)),
                arms.iter()
                    .map(|arm| {
                        let (var, body) = self.under_binder(&arm.var, &arm.body);
                        MatchArm { var, ty: arm.ty.clone(), body }
                    })
                    .collect(),
            ),
            Term::TLam(y, bound, body) => {
                if self.ftv.contains(y) {
                    let mut avoid = self.ftv.clone();
                    avoid.extend(body.free_type_vars());
                    let z = fresh_name(y, &avoid);
                    let body = subst_type_in_term(body, y, &Type::Var(z.clone()));
                    Term::TLam(z, bound.clone(), Box::new(self.go(&body)))
                } else {
                    Term::TLam(y.clone(), bound.clone(), Box::new(self.go(body)))
                }
            }
        }
    }

    fn under_binder(&self, y: &Name, body: &Term) -> (Name, Term) {
        if y == self.x {
            return (y.clone(), body.clone());
        }
        if self.fv.contains(y) {
            let mut avoid = self.fv.clone();
            avoid.extend(body.free_vars());
            avoid.insert(self.x.to_string());
            let z = fresh_name(y, &avoid);
            let body = subst_term(body, y, &Term::Var(z.clone()));
            return (z, self.go(&body));
        }
        (y.clone(), self.go(body))
    }
}

/// `t[X := ty]`, rewriting annotations inside the term.
pub fn subst_type_in_term(t: &Term, x: &str, ty: &Type) -> Term {
    let fv = ty.free_vars();
    SubstTypeInTerm { x, ty, fv: &fv }.go(t)
}

struct SubstTypeInTerm<'a> {
    x: &'a str,
    ty: &'a Type,
    fv: &'a BTreeSet<Name>,
}

impl SubstTypeInTerm<'_> {
    fn ty(&self, t: &Type) -> Type {
        subst_type_in_type(t, self.x, self.ty)
    }

    fn go(&self, t: &Term) -> Term {
        match t {
            Term::Lit(_) | Term::Var(_) => t.clone(),
            Term::Cons(a, b) => Term::cons(self.go(a), self.go(b)),
            Term::Head(a) => Term::head(self.go(a)),
            Term::Tail(a) => Term::tail(self.go(a)),
            Term::Record(fs) => Term::Record(fs.iter().map(|(l, t)| (l.clone(), self.go(t))).collect()),
            Term::Field(a, l) => Term::field(self.go(a), l.clone()),
            Term::App(a, b) => Term::app(self.go(a), self.go(b)),
            Term::TApp(a, ty) => Term::tapp(self.go(a), self.ty(ty)),
            Term::Op(k, args) => Term::Op(*k, args.iter().map(|a| self.go(a)).collect()),
            Term::Lam(y, ty, body) => Term::Lam(y.clone(), self.ty(ty), Box::new(self.go(body))),
            Term::Let(y, a, body) => Term::Let(y.clone(), Box::new(self.go(a)), Box::new(self.go(body))),
            Term::Match(s, arms) => Term::Match(
                Box::new(self.go(s)),
                arms.iter()
                    .map(|arm| MatchArm { var: arm.var.clone(), ty: self.ty(&arm.ty), body: self.go(&arm.body) })
                    .collect(),
            ),
            Term::TLam(y, bound, body) => {
                let bound = self.ty(bound);
                if y == self.x {
                    return Term::TLam(y.clone(), bound, body.clone());
                }
                if self.fv.contains(y) {
                    let mut avoid = self.fv.clone();
                    avoid.extend(body.free_type_vars());
                    avoid.insert(self.x.to_string());
                    let z = fresh_name(y, &avoid);
                    let body = subst_type_in_term(body, y, &Type::Var(z.clone()));
                    Term::TLam(z, bound, Box::new(self.go(&body)))
                } else {
                    Term::TLam(y.clone(), bound, Box::new(self.go(body)))
                }
            }
        }
    }
}

/// `t0[X := ty]`.
pub fn subst_type_in_type(t0: &Type, x: &str, ty: &Type) -> Type {
    let fv = ty.free_vars();
    subst_tt(t0, x, ty, &fv)
}

fn subst_tt(t0: &Type, x: &str, ty: &Type, fv: &BTreeSet<Name>) -> Type {
    let go = |t: &Type| subst_tt(t, x, ty, fv);
    match t0 {
        Type::Top | Type::Base(_) | Type::Singleton(_) => t0.clone(),
        Type::Var(y) if y == x => ty.clone(),
        Type::Var(_) => t0.clone(),
        Type::ServerRef(s) => Type::server_ref(crate::ast::ChanSig::new(go(&s.tm), go(&s.ta), go(&s.tp))),
        Type::Chan(s) => Type::chan(crate::ast::ChanSig::new(go(&s.tm), go(&s.ta), go(&s.tp))),
        Type::Record(fs) => Type::Record(fs.iter().map(|(l, t)| (l.clone(), go(t))).collect()),
        Type::List(t) => Type::list(go(t)),
        Type::Arrow(a, b) => Type::arrow(go(a), go(b)),
        Type::App(a, b) => Type::app(go(a), go(b)),
        Type::Union(a, b) => Type::union(go(a), go(b)),
        Type::Match(s, cases) => Type::match_type(go(s), cases.iter().map(|(p, c)| (go(p), go(c))).collect()),
        Type::Forall(y, bound, body) => {
            let bound = go(bound);
            if y == x {
                return Type::Forall(y.clone(), Box::new(bound), body.clone());
            }
            if fv.contains(y) {
                let mut avoid = fv.clone();
                body.all_names(&mut avoid);
                avoid.insert(x.to_string());
                let z = fresh_name(y, &avoid);
                let body = subst_type_in_type(body, y, &Type::Var(z.clone()));
                Type::Forall(z, Box::new(bound), Box::new(go(&body)))
            } else {
                Type::Forall(y.clone(), Box::new(bound), Box::new(go(body)))
            }
        }
    }
}
