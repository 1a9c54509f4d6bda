//! A typed calculus for P4Runtime control-plane programs.
//!
//! The crate provides the term and type syntax, a type checker with
//! singleton, union and match types, a small-step evaluator, a model of
//! P4Runtime servers, the translation of P4Info metadata into types, and a
//! deterministic client/server network simulator.

pub mod ast;
pub mod subst;
pub mod syntax;
pub mod typing;
pub mod eval;
pub mod json;
pub mod encoding;
pub mod server;
pub mod network;
pub mod scenario;
pub mod cli;

pub use ast::{alpha_eq, fresh_name, sugar, BaseType, ChanSig, ChannelId, GroundValue, MatchArm, Name, OpKind, Term, Type, WILDCARD};
