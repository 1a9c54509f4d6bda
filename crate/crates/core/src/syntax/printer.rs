use std::fmt::Write;

use crate::ast::{ChanSig, GroundValue, Term, Type};

// Type precedence: forall 0, arrow 1, union 2, match 3, app 4, atom 5.
// Term precedence: binders 0, cons 1, match 2, app 3, postfix 4, atom 5.

pub fn print_type(t: &Type) -> String {
    let mut s = String::new();
    ty(&mut s, t, 0);
    s
}

pub fn print_term(t: &Term) -> String {
    let mut s = String::new();
    term(&mut s, t, 0);
    s
}

pub fn print_ground(v: &GroundValue) -> String {
    print_term(&Term::from_ground(v))
}

fn type_prec(t: &Type) -> u8 {
    match t {
        Type::Forall(..) => 0,
        Type::Arrow(..) => 1,
        Type::Union(..) => 2,
        Type::Match(..) => 3,
        Type::App(..) => 4,
        _ => 5,
    }
}

fn sig(out: &mut String, s: &ChanSig) {
    out.push('[');
    ty(out, &s.tm, 0);
    out.push_str(", ");
    ty(out, &s.ta, 0);
    out.push_str(", ");
    ty(out, &s.tp, 0);
    out.push(']');
}

fn ty(out: &mut String, t: &Type, min: u8) {
    let p = type_prec(t);
    if p < min {
        out.push('(');
        ty(out, t, 0);
        out.push(')');
        return;
    }
    match t {
        Type::Top => out.push_str("Top"),
        Type::Base(b) => out.push_str(b.name()),
        Type::ServerRef(s) => {
            out.push_str("ServerRef");
            sig(out, s);
        }
        Type::Chan(s) => {
            out.push_str("Chan");
            sig(out, s);
        }
        Type::Record(fs) => {
            out.push('{');
            for (i, (l, t)) in fs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{}: ", label(l));
                ty(out, t, 0);
            }
            out.push('}');
        }
        Type::List(t) => {
            out.push('[');
            ty(out, t, 0);
            out.push(']');
        }
        Type::Arrow(a, b) => {
            ty(out, a, 2);
            out.push_str(" -> ");
            ty(out, b, if matches!(**b, Type::Forall(..)) { 0 } else { 1 });
        }
        Type::Var(x) => out.push_str(x),
        Type::Forall(x, bound, body) => {
            let _ = write!(out, "forall {x}");
            if **bound != Type::Top {
                out.push_str(" <: ");
                ty(out, bound, 1);
            }
            out.push_str(". ");
            ty(out, body, 0);
        }
        Type::App(f, a) => {
            ty(out, f, 4);
            out.push(' ');
            ty(out, a, 5);
        }
        Type::Union(a, b) => {
            ty(out, a, 2);
            out.push_str(" | ");
            ty(out, b, 3);
        }
        Type::Singleton(v) => match &**v {
            GroundValue::Str(_) => term(out, &Term::Lit((**v).clone()), 5),
            other => {
                out.push('\'');
                term(out, &Term::from_ground(other), 4);
            }
        },
        Type::Match(s, cases) => {
            ty(out, s, 3);
            out.push_str(" match { ");
            for (i, (p, c)) in cases.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                ty(out, p, 0);
                out.push_str(" => ");
                ty(out, c, 0);
            }
            out.push_str(" }");
        }
    }
}

fn term_prec(t: &Term) -> u8 {
    match t {
        Term::Lam(..) | Term::TLam(..) | Term::Let(..) => 0,
        Term::Cons(..) => 1,
        Term::Match(..) => 2,
        Term::App(..) | Term::TApp(..) | Term::Head(_) | Term::Tail(_) => 3,
        Term::Field(..) => 4,
        Term::Lit(GroundValue::Int(n)) if *n < 0 => 4,
        _ => 5,
    }
}

/// Labels that are not identifiers are written as string literals.
fn label(l: &str) -> String {
    let mut cs = l.chars();
    let ident = cs.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ident {
        l.to_string()
    } else {
        escape(l)
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn lit(out: &mut String, v: &GroundValue) {
    match v {
        GroundValue::Unit => out.push_str("()"),
        GroundValue::Int(n) => {
            let _ = write!(out, "{n}");
        }
        GroundValue::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        GroundValue::Str(s) => out.push_str(&escape(s)),
        GroundValue::Bytes(bs) => {
            out.push_str("b(");
            for (i, b) in bs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{b}");
            }
            out.push(')');
        }
        GroundValue::Addr { name, sig: s } => {
            let _ = write!(out, "addr({})", escape(name));
            sig(out, s);
        }
        GroundValue::Chan { id, sig: s } => {
            let _ = write!(out, "chan({}, {})", escape(&id.server), id.index);
            sig(out, s);
        }
        GroundValue::Nil => out.push_str("nil"),
        GroundValue::Cons(..) | GroundValue::Record(_) => term(out, &Term::from_ground(v), 0),
    }
}

fn term(out: &mut String, t: &Term, min: u8) {
    if term_prec(t) < min {
        out.push('(');
        term(out, t, 0);
        out.push(')');
        return;
    }
    match t {
        Term::Lit(v) => lit(out, v),
        Term::Var(x) => out.push_str(x),
        Term::Cons(h, tl) => {
            term(out, h, 2);
            out.push_str(" :: ");
            term(out, tl, if matches!(**tl, Term::Lam(..) | Term::TLam(..) | Term::Let(..)) { 0 } else { 1 });
        }
        Term::Head(a) => {
            out.push_str("head ");
            term(out, a, 4);
        }
        Term::Tail(a) => {
            out.push_str("tail ");
            term(out, a, 4);
        }
        Term::Record(fs) => {
            out.push('{');
            for (i, (l, t)) in fs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{} = ", label(l));
                term(out, t, 0);
            }
            out.push('}');
        }
        Term::Field(a, l) => {
            term(out, a, 4);
            let _ = write!(out, ".{}", label(l));
        }
        Term::Lam(x, a, body) => {
            let _ = write!(out, "fun({x}: ");
            ty(out, a, 0);
            out.push_str(") ");
            term(out, body, 0);
        }
        Term::TLam(x, bound, body) => {
            let _ = write!(out, "Fun({x}");
            if *bound != Type::Top {
                out.push_str(" <: ");
                ty(out, bound, 0);
            }
            out.push_str(") ");
            term(out, body, 0);
        }
        Term::App(f, a) => {
            term(out, f, 3);
            out.push(' ');
            term(out, a, 4);
        }
        Term::TApp(f, a) => {
            term(out, f, 3);
            out.push_str(" [");
            ty(out, a, 0);
            out.push(']');
        }
        Term::Let(x, v, body) => {
            let _ = write!(out, "let {x} = ");
            term(out, v, 0);
            out.push_str(" in ");
            term(out, body, 0);
        }
        Term::Match(s, arms) => {
            term(out, s, 2);
            out.push_str(" match { ");
            for (i, arm) in arms.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{}: ", arm.var);
                ty(out, &arm.ty, 0);
                out.push_str(" => ");
                term(out, &arm.body, 0);
            }
            out.push_str(" }");
        }
        Term::Op(k, args) => {
            out.push_str(k.name());
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                term(out, a, 0);
            }
            out.push(')');
        }
    }
}
