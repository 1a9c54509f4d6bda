use indexmap::IndexMap;

use super::lexer::{lex, Tok, Token};
use super::{ParseError, Program};
use crate::ast::{sugar, ChanSig, ChannelId, GroundValue, MatchArm, Name, OpKind, Term, Type};

const KEYWORDS: &[&str] = &[
    "fun", "Fun", "let", "in", "match", "forall", "head", "tail", "nil", "true", "false", "type", "b", "addr",
    "chan", "Connect", "Read", "Insert", "Modify", "Delete", "Top", "Int", "Bool", "String", "Unit", "Bytes",
    "ServerRef", "Chan", "Option", "TableEntry", "P4Entity",
];

const TYPE_KEYWORDS: &[&str] =
    &["Top", "Int", "Bool", "String", "Unit", "Bytes", "ServerRef", "Chan", "Option", "TableEntry", "P4Entity"];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    aliases: IndexMap<Name, Type>,
    bound_tvars: Vec<Name>,
}

impl Parser {
    pub fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(src)?, pos: 0, aliases: IndexMap::new(), bound_tvars: Vec::new() })
    }

    pub fn with_aliases(mut self, aliases: &IndexMap<Name, Type>) -> Self {
        self.aliases = aliases.clone();
        self
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError { line: t.line, col: t.col, message: message.into() }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(format!("expected {}, found {}", tok.describe(), self.peek().describe())))
        }
    }

    fn eat(&mut self, tok: Tok) -> bool {
        if *self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(format!("expected `{kw}`, found {}", self.peek().describe())))
        }
    }

    fn ident(&mut self, what: &str) -> Result<Name, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            other => Err(self.error_here(format!("expected {what}, found {}", other.describe()))),
        }
    }

    /// Record labels may reuse keywords.
    fn label(&mut self) -> Result<Name, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) | Tok::Str(s) => {
                self.bump();
                Ok(s)
            }
            other => Err(self.error_here(format!("expected a label, found {}", other.describe()))),
        }
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub fn expect_eof(&mut self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.error_here(format!("unexpected {} after end of input", self.peek().describe())))
        }
    }

    pub fn program(&mut self) -> Result<Program, ParseError> {
        let mut decls = IndexMap::new();
        while self.is_kw("type") {
            self.bump();
            let name = self.ident("a type name")?;
            self.expect(Tok::Eq)?;
            let ty = self.ty()?;
            self.expect(Tok::Semi)?;
            self.aliases.insert(name.clone(), ty.clone());
            decls.insert(name, ty);
        }
        let term = if self.at_eof() { None } else { Some(self.term()?) };
        self.expect_eof()?;
        Ok(Program { decls, term })
    }

    // ---- types ----

    pub fn ty(&mut self) -> Result<Type, ParseError> {
        if self.is_kw("forall") {
            self.bump();
            let x = self.ident("a type variable")?;
            let bound = if self.eat(Tok::SubType) { self.ty_arrow()? } else { Type::Top };
            self.expect(Tok::Dot)?;
            self.bound_tvars.push(x.clone());
            let body = self.ty();
            self.bound_tvars.pop();
            return Ok(Type::forall(x, bound, body?));
        }
        self.ty_arrow()
    }

    fn ty_arrow(&mut self) -> Result<Type, ParseError> {
        let lhs = self.ty_union()?;
        if self.eat(Tok::Arrow) {
            let rhs = if self.is_kw("forall") { self.ty()? } else { self.ty_arrow()? };
            return Ok(Type::arrow(lhs, rhs));
        }
        Ok(lhs)
    }

    fn ty_union(&mut self) -> Result<Type, ParseError> {
        let mut t = self.ty_match()?;
        while self.eat(Tok::Bar) {
            let rhs = self.ty_match()?;
            t = Type::union(t, rhs);
        }
        Ok(t)
    }

    fn ty_match(&mut self) -> Result<Type, ParseError> {
        let mut t = self.ty_app()?;
        while self.is_kw("match") {
            self.bump();
            self.expect(Tok::LBrace)?;
            let mut cases = Vec::new();
            while *self.peek() != Tok::RBrace {
                let p = self.ty()?;
                self.expect(Tok::FatArrow)?;
                let c = self.ty()?;
                cases.push((p, c));
                if !self.eat(Tok::Comma) {
                    break;
                }
            }
            if cases.is_empty() {
                return Err(self.error_here("match type needs at least one case"));
            }
            self.expect(Tok::RBrace)?;
            t = Type::match_type(t, cases);
        }
        Ok(t)
    }

    fn starts_ty_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => !is_keyword(s) || TYPE_KEYWORDS.contains(&s.as_str()),
            Tok::LBrace | Tok::LBracket | Tok::LParen | Tok::Quote | Tok::Str(_) | Tok::Int(_) => true,
            _ => false,
        }
    }

    fn ty_app(&mut self) -> Result<Type, ParseError> {
        let mut t = self.ty_atom()?;
        while self.starts_ty_atom() {
            let a = self.ty_atom()?;
            t = Type::app(t, a);
        }
        Ok(t)
    }

    fn chan_sig(&mut self) -> Result<ChanSig, ParseError> {
        self.expect(Tok::LBracket)?;
        let tm = self.ty()?;
        self.expect(Tok::Comma)?;
        let ta = self.ty()?;
        self.expect(Tok::Comma)?;
        let tp = self.ty()?;
        self.expect(Tok::RBracket)?;
        Ok(ChanSig::new(tm, ta, tp))
    }

    fn ty_atom(&mut self) -> Result<Type, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                if self.bound_tvars.contains(&s) {
                    self.bump();
                    return Ok(Type::Var(s));
                }
                let t = match s.as_str() {
                    "Top" => Type::Top,
                    "Int" => Type::INT,
                    "Bool" => Type::BOOL,
                    "String" => Type::STRING,
                    "Unit" => Type::UNIT,
                    "Bytes" => Type::BYTES,
                    "Option" => sugar::option_def(),
                    "TableEntry" => sugar::table_entry_def(),
                    "P4Entity" => sugar::p4entity_def(),
                    "ServerRef" | "Chan" => {
                        self.bump();
                        let sig = self.chan_sig()?;
                        return Ok(if s == "Chan" { Type::chan(sig) } else { Type::server_ref(sig) });
                    }
                    _ if is_keyword(&s) => {
                        return Err(self.error_here(format!("expected a type, found `{s}`")));
                    }
                    _ => match self.aliases.get(&s) {
                        Some(t) => t.clone(),
                        None => Type::Var(s.clone()),
                    },
                };
                self.bump();
                Ok(t)
            }
            Tok::LBrace => {
                self.bump();
                let mut fields: Vec<(Name, Type)> = Vec::new();
                while *self.peek() != Tok::RBrace {
                    let l = self.label()?;
                    if fields.iter().any(|(m, _)| *m == l) {
                        return Err(self.error_here(format!("duplicate record label `{l}`")));
                    }
                    self.expect(Tok::Colon)?;
                    let t = self.ty()?;
                    fields.push((l, t));
                    if !self.eat(Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RBrace)?;
                Ok(Type::Record(fields))
            }
            Tok::LBracket => {
                self.bump();
                let t = self.ty()?;
                self.expect(Tok::RBracket)?;
                Ok(Type::list(t))
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Quote => {
                self.bump();
                let v = self.ground_atom()?;
                Ok(Type::singleton(v))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Type::singleton(GroundValue::Str(s)))
            }
            Tok::Int(n) => {
                self.bump();
                Ok(Type::singleton(GroundValue::Int(n)))
            }
            other => Err(self.error_here(format!("expected a type, found {}", other.describe()))),
        }
    }

    fn ground_atom(&mut self) -> Result<GroundValue, ParseError> {
        let (line, col) = (self.toks[self.pos].line, self.toks[self.pos].col);
        let t = self.term_atom()?;
        t.as_ground().ok_or(ParseError { line, col, message: "singleton types need a ground value".into() })
    }

    // ---- terms ----

    pub fn term(&mut self) -> Result<Term, ParseError> {
        if self.is_kw("fun") {
            self.bump();
            self.expect(Tok::LParen)?;
            let x = self.ident("a variable")?;
            self.expect(Tok::Colon)?;
            let ty = self.ty()?;
            self.expect(Tok::RParen)?;
            let body = self.term()?;
            return Ok(Term::lam(x, ty, body));
        }
        if self.is_kw("Fun") {
            self.bump();
            self.expect(Tok::LParen)?;
            let x = self.ident("a type variable")?;
            let bound = if self.eat(Tok::SubType) { self.ty()? } else { Type::Top };
            self.expect(Tok::RParen)?;
            self.bound_tvars.push(x.clone());
            let body = self.term();
            self.bound_tvars.pop();
            return Ok(Term::tlam(x, bound, body?));
        }
        if self.is_kw("let") {
            self.bump();
            let x = self.ident("a variable")?;
            self.expect(Tok::Eq)?;
            let v = self.term()?;
            self.expect_kw("in")?;
            let body = self.term()?;
            return Ok(Term::let_in(x, v, body));
        }
        self.term_cons()
    }

    fn term_cons(&mut self) -> Result<Term, ParseError> {
        let h = self.term_match()?;
        if self.eat(Tok::ColonColon) {
            let t = if self.starts_binder() { self.term()? } else { self.term_cons()? };
            return Ok(Term::cons(h, t));
        }
        Ok(h)
    }

    fn starts_binder(&self) -> bool {
        self.is_kw("fun") || self.is_kw("Fun") || self.is_kw("let")
    }

    fn term_match(&mut self) -> Result<Term, ParseError> {
        let mut t = self.term_app()?;
        while self.is_kw("match") {
            self.bump();
            self.expect(Tok::LBrace)?;
            let mut arms = Vec::new();
            while *self.peek() != Tok::RBrace {
                let var = self.ident("a variable")?;
                self.expect(Tok::Colon)?;
                let ty = self.ty()?;
                self.expect(Tok::FatArrow)?;
                let body = self.term()?;
                arms.push(MatchArm { var, ty, body });
                if !self.eat(Tok::Comma) {
                    break;
                }
            }
            if arms.is_empty() {
                return Err(self.error_here("match needs at least one case"));
            }
            self.expect(Tok::RBrace)?;
            t = Term::match_on(t, arms);
        }
        Ok(t)
    }

    fn starts_term_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => {
                !is_keyword(s)
                    || matches!(
                        s.as_str(),
                        "true" | "false" | "nil" | "b" | "addr" | "chan" | "Connect" | "Read" | "Insert" | "Modify"
                            | "Delete"
                    )
            }
            Tok::Int(_) | Tok::Str(_) | Tok::LParen | Tok::LBrace => true,
            _ => false,
        }
    }

    fn term_app(&mut self) -> Result<Term, ParseError> {
        let mut t = if self.is_kw("head") || self.is_kw("tail") {
            let is_head = self.is_kw("head");
            self.bump();
            let a = self.term_postfix()?;
            if is_head {
                Term::head(a)
            } else {
                Term::tail(a)
            }
        } else {
            self.term_postfix()?
        };
        loop {
            if *self.peek() == Tok::LBracket {
                self.bump();
                let ty = self.ty()?;
                self.expect(Tok::RBracket)?;
                t = Term::tapp(t, ty);
            } else if self.starts_term_atom() {
                let a = self.term_postfix()?;
                t = Term::app(t, a);
            } else {
                return Ok(t);
            }
        }
    }

    fn term_postfix(&mut self) -> Result<Term, ParseError> {
        let mut t = self.term_atom()?;
        while *self.peek() == Tok::Dot {
            self.bump();
            let l = self.label()?;
            t = Term::field(t, l);
        }
        Ok(t)
    }

    fn term_atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Term::int(n))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Term::str(s))
            }
            Tok::LParen => {
                self.bump();
                if self.eat(Tok::RParen) {
                    return Ok(Term::unit());
                }
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::LBrace => {
                self.bump();
                let mut fields: Vec<(Name, Term)> = Vec::new();
                while *self.peek() != Tok::RBrace {
                    let l = self.label()?;
                    if fields.iter().any(|(m, _)| *m == l) {
                        return Err(self.error_here(format!("duplicate record label `{l}`")));
                    }
                    self.expect(Tok::Eq)?;
                    let t = self.term()?;
                    fields.push((l, t));
                    if !self.eat(Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RBrace)?;
                Ok(Term::Record(fields))
            }
            Tok::Ident(s) => match s.as_str() {
                "true" | "false" => {
                    self.bump();
                    Ok(Term::bool(s == "true"))
                }
                "nil" => {
                    self.bump();
                    if *self.peek() == Tok::LBracket && !self.toks[self.pos].spaced {
                        self.bump();
                        self.ty()?;
                        self.expect(Tok::RBracket)?;
                    }
                    Ok(Term::nil())
                }
                "b" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let mut bytes = Vec::new();
                    while *self.peek() != Tok::RParen {
                        match self.bump() {
                            Tok::Int(n) if (0..=255).contains(&n) => bytes.push(n as u8),
                            Tok::Int(n) => {
                                self.pos -= 1;
                                return Err(self.error_here(format!("byte {n} outside 0..255")));
                            }
                            other => {
                                self.pos -= 1;
                                return Err(self.error_here(format!("expected a byte, found {}", other.describe())));
                            }
                        }
                        if !self.eat(Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::RParen)?;
                    Ok(Term::bytes(bytes))
                }
                "addr" | "chan" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let name = match self.bump() {
                        Tok::Str(n) => n,
                        other => {
                            self.pos -= 1;
                            return Err(self.error_here(format!("expected a server name, found {}", other.describe())));
                        }
                    };
                    let index = if s == "chan" {
                        self.expect(Tok::Comma)?;
                        match self.bump() {
                            Tok::Int(n) if n >= 0 => Some(n as u64),
                            other => {
                                self.pos -= 1;
                                return Err(
                                    self.error_here(format!("expected a channel number, found {}", other.describe()))
                                );
                            }
                        }
                    } else {
                        None
                    };
                    self.expect(Tok::RParen)?;
                    let sig = Box::new(self.chan_sig()?);
                    Ok(Term::Lit(match index {
                        Some(index) => GroundValue::Chan { id: ChannelId { server: name, index }, sig },
                        None => GroundValue::Addr { name, sig },
                    }))
                }
                _ => {
                    if let Some(kind) = OpKind::from_name(&s) {
                        self.bump();
                        self.expect(Tok::LParen)?;
                        let mut args = Vec::new();
                        while *self.peek() != Tok::RParen {
                            args.push(self.term()?);
                            if !self.eat(Tok::Comma) {
                                break;
                            }
                        }
                        if args.len() != kind.arity() {
                            return Err(self.error_here(format!(
                                "{} takes {} argument(s), found {}",
                                kind.name(),
                                kind.arity(),
                                args.len()
                            )));
                        }
                        self.expect(Tok::RParen)?;
                        return Ok(Term::Op(kind, args));
                    }
                    let x = self.ident("a term")?;
                    Ok(Term::Var(x))
                }
            },
            other => Err(self.error_here(format!("expected a term, found {}", other.describe()))),
        }
    }
}
