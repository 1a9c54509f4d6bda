//! Small-step reduction of closed terms. Reductions that need no server are
//! internal steps; P4Runtime operations surface as requests which are
//! resumed with the server's response.

use thiserror::Error;

use crate::ast::{GroundValue, MatchArm, OpKind, Term};
use crate::subst::{subst_term, subst_type_in_term};
use crate::typing::{self, Checker, TypingEnv};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("stuck: {0}")]
    Stuck(String),
    #[error("no match case accepts {0}")]
    MatchNoCase(String),
    #[error("evaluation ran out of fuel")]
    FuelExhausted,
}

/// A P4Runtime operation waiting for its response.
#[derive(Debug, Clone, PartialEq)]
pub struct Request {
    pub kind: OpKind,
    /// Server address for `Connect`, channel otherwise.
    pub target: GroundValue,
    /// Entity argument; absent for `Connect`.
    pub payload: Option<GroundValue>,
    term: Term,
}

impl Request {
    /// Plug the response into the hole left by the operation.
    pub fn resume(&self, response: &GroundValue) -> Result<Term, EvalError> {
        match reduce(&self.term, Some(response))? {
            Outcome::Tau(t) => Ok(t),
            _ => Err(EvalError::Stuck("request no longer pending".into())),
        }
    }

    pub fn term(&self) -> &Term {
        &self.term
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Value,
    Tau(Term),
    Request(Request),
}

pub fn step(t: &Term) -> Result<Step, EvalError> {
    Ok(match reduce(t, None)? {
        Outcome::Value => Step::Value,
        Outcome::Tau(t2) => Step::Tau(t2),
        Outcome::Request(kind, target, payload) => Step::Request(Request { kind, target, payload, term: t.clone() }),
    })
}

/// Take internal steps until a value, a pending request or the fuel limit.
pub fn run_tau(t: &Term, fuel: usize) -> Result<Term, EvalError> {
    let mut cur = t.clone();
    for _ in 0..fuel {
        match step(&cur)? {
            Step::Tau(next) => cur = next,
            Step::Value | Step::Request(_) => return Ok(cur),
        }
    }
    match step(&cur)? {
        Step::Tau(_) => Err(EvalError::FuelExhausted),
        _ => Ok(cur),
    }
}

enum Outcome {
    Value,
    Tau(Term),
    Request(OpKind, GroundValue, Option<GroundValue>),
}

fn stuck(what: &str, t: &Term) -> EvalError {
    EvalError::Stuck(format!("{what}: {}", crate::syntax::print_term(t)))
}

/// Reduce the leftmost-innermost redex. With a response, the pending
/// operation redex is replaced by it instead of being reported.
fn reduce(t: &Term, response: Option<&GroundValue>) -> Result<Outcome, EvalError> {
    use Outcome::*;
    macro_rules! sub {
        ($e:expr, $rebuild:expr) => {
            match reduce($e, response)? {
                Value => {}
                Tau(x) => return Ok(Tau($rebuild(x))),
                r @ Request(..) => return Ok(r),
            }
        };
    }
    match t {
        Term::Lit(_) | Term::Lam(..) | Term::TLam(..) => Ok(Value),
        Term::Var(x) => Err(EvalError::Stuck(format!("free variable `{x}`"))),
        Term::Cons(h, tl) => {
            sub!(h, |x| Term::cons(x, (**tl).clone()));
            sub!(tl, |x| Term::cons((**h).clone(), x));
            Ok(Value)
        }
        Term::Record(fs) => {
            for (i, (_, ft)) in fs.iter().enumerate() {
                sub!(ft, |x| {
                    let mut fs2 = fs.clone();
                    fs2[i].1 = x;
                    Term::Record(fs2)
                });
            }
            Ok(Value)
        }
        Term::Head(a) | Term::Tail(a) => {
            let is_head = matches!(t, Term::Head(_));
            sub!(a, |x| if is_head { Term::head(x) } else { Term::tail(x) });
            match &**a {
                Term::Cons(h, tl) => {
                    let part = if is_head { h } else { tl };
                    Ok(Tau(Term::record([("some", (**part).clone())])))
                }
                Term::Lit(GroundValue::Nil) => Ok(Tau(Term::record([("none", Term::unit())]))),
                Term::Lit(GroundValue::Cons(h, tl)) => {
                    let part = if is_head { h } else { tl };
                    Ok(Tau(Term::record([("some", Term::from_ground(part))])))
                }
                _ => Err(stuck("head or tail of a non-list", a)),
            }
        }
        Term::Field(a, l) => {
            sub!(a, |x| Term::field(x, l.clone()));
            match &**a {
                Term::Record(fs) => match fs.iter().find(|(m, _)| m == l) {
                    Some((_, v)) => Ok(Tau(v.clone())),
                    None => Err(stuck(&format!("missing field `{l}`"), a)),
                },
                Term::Lit(v @ GroundValue::Record(_)) => match v.field(l) {
                    Some(fv) => Ok(Tau(Term::from_ground(fv))),
                    None => Err(stuck(&format!("missing field `{l}`"), a)),
                },
                _ => Err(stuck("projection from a non-record", a)),
            }
        }
        Term::App(f, a) => {
            sub!(f, |x| Term::app(x, (**a).clone()));
            sub!(a, |x| Term::app((**f).clone(), x));
            match &**f {
                Term::Lam(x, _, body) => Ok(Tau(subst_term(body, x, a))),
                _ => Err(stuck("application of a non-function", f)),
            }
        }
        Term::TApp(f, ty) => {
            sub!(f, |x| Term::tapp(x, ty.clone()));
            match &**f {
                Term::TLam(x, _, body) => Ok(Tau(subst_type_in_term(body, x, ty))),
                _ => Err(stuck("type application of a non-abstraction", f)),
            }
        }
        Term::Let(x, v, body) => {
            sub!(v, |e| Term::let_in(x.clone(), e, (**body).clone()));
            Ok(Tau(subst_term(body, x, v)))
        }
        Term::Match(s, arms) => {
            sub!(s, |e| Term::match_on(e, arms.clone()));
            let k = select_arm(s, arms)?;
            Ok(Tau(subst_term(&arms[k].body, &arms[k].var, s)))
        }
        Term::Op(kind, args) => {
            for (i, a) in args.iter().enumerate() {
                sub!(a, |x| {
                    let mut args2 = args.clone();
                    args2[i] = x;
                    Term::Op(*kind, args2)
                });
            }
            if let Some(v) = response {
                return Ok(Tau(Term::from_ground(v)));
            }
            let target = args[0].as_ground().ok_or_else(|| stuck("operation target", &args[0]))?;
            let target_ok = match kind {
                OpKind::Connect => matches!(target, GroundValue::Addr { .. }),
                _ => matches!(target, GroundValue::Chan { .. }),
            };
            if !target_ok {
                return Err(stuck(&format!("{} target", kind.name()), &args[0]));
            }
            let payload = match args.get(1) {
                Some(p) => Some(p.as_ground().ok_or_else(|| stuck("operation entity", p))?),
                None => None,
            };
            Ok(Request(*kind, target, payload))
        }
    }
}

/// Index of the first case whose type contains the scrutinee value.
pub fn select_arm(v: &Term, arms: &[MatchArm]) -> Result<usize, EvalError> {
    let checker = Checker::default();
    let env = TypingEnv::new();
    let ground = v.as_ground();
    let vt = match ground {
        Some(_) => None,
        None => typing::typecheck(&env, v).ok(),
    };
    for (k, arm) in arms.iter().enumerate() {
        let hit = match (&ground, &vt) {
            (Some(g), _) => checker.member_of(&env, g, &arm.ty),
            (None, Some(t)) => checker.subtype(&env, t, &arm.ty),
            (None, None) => false,
        };
        if hit {
            return Ok(k);
        }
    }
    Err(EvalError::MatchNoCase(crate::syntax::print_term(v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{ChanSig, ChannelId, Type};
    use crate::syntax::parse_term;

    fn tau(src: &str) -> Term {
        match step(&parse_term(src).unwrap()).unwrap() {
            Step::Tau(t) => t,
            other => panic!("expected an internal step, got {other:?}"),
        }
    }

    #[test]
    fn head_of_singleton_list() {
        assert_eq!(tau("head (1 :: nil)"), parse_term("{some = 1}").unwrap());
        assert_eq!(tau("tail (1 :: nil)"), parse_term("{some = nil}").unwrap());
        assert_eq!(tau("head nil"), parse_term("{none = ()}").unwrap());
    }

    #[test]
    fn beta_steps() {
        assert_eq!(tau("(fun(x: Int) x) 5"), Term::int(5));
        assert_eq!(tau("(Fun(X) fun(x: X) x) [Int]"), parse_term("fun(x: Int) x").unwrap());
        assert_eq!(run_tau(&parse_term("let x = 1 in x").unwrap(), 10).unwrap(), Term::int(1));
    }

    #[test]
    fn values_do_not_step() {
        assert_eq!(step(&parse_term("{a = 1, b = fun(x: Int) x}").unwrap()).unwrap(), Step::Value);
    }

    #[test]
    fn field_of_head_nil() {
        let t = parse_term("{a = head nil}.a").unwrap();
        let t1 = tau("{a = head nil}.a");
        assert_eq!(t1, parse_term("{a = {none = ()}}.a").unwrap());
        assert_eq!(run_tau(&t, 2).unwrap(), parse_term("{none = ()}").unwrap());
    }

    #[test]
    fn match_picks_first_member() {
        assert_eq!(tau("3 match { x: Bool => 0, y: Int => y, z: Top => 2 }"), Term::int(3));
        let e = step(&parse_term("3 match { x: Bool => 0 }").unwrap()).unwrap_err();
        assert!(matches!(e, EvalError::MatchNoCase(_)));
    }

    #[test]
    fn operations_request_and_resume() {
        let sig = ChanSig::new(Type::Top, Type::Top, Type::Top);
        let ch = GroundValue::Chan { id: ChannelId { server: "s".into(), index: 1 }, sig: Box::new(sig) };
        let t = Term::let_in(
            "e",
            parse_term("{name = \"t\"}").unwrap(),
            Term::op(OpKind::Insert, vec![Term::Lit(ch.clone()), Term::var("e")]),
        );
        let t = run_tau(&t, 10).unwrap();
        let req = match step(&t).unwrap() {
            Step::Request(r) => r,
            other => panic!("{other:?}"),
        };
        assert_eq!(req.kind, OpKind::Insert);
        assert_eq!(req.target, ch);
        assert_eq!(req.payload, Some(GroundValue::record([("name", GroundValue::str("t"))])));
        assert_eq!(req.resume(&GroundValue::Bool(true)).unwrap(), Term::bool(true));
    }

    #[test]
    fn run_tau_fuel() {
        let t = parse_term("let x = 1 in let y = x in y").unwrap();
        assert_eq!(run_tau(&t, 1), Err(EvalError::FuelExhausted));
        assert_eq!(run_tau(&t, 2).unwrap(), Term::int(1));
    }
}
