//! Command-line front end.
//!
//! Exit codes: 0 success, 1 type error, 2 IO or parse error, 3 runtime
//! failure (fuel exhausted, deadlock, stuck client or invariant violation).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use indexmap::IndexMap;
use serde_json::{json, Value};

use crate::ast::GroundValue;
use crate::encoding::{emit_type_decls, encode_config, EncodeOptions};
use crate::json::type_to_json;
use crate::network::{Label, RunOptions, RunStatus};
use crate::scenario::{load_config, load_scenario, ClientScope};
use crate::server::ServerState;
use crate::syntax::{parse_program, parse_program_with, print_ground, print_term, print_type};
use crate::typing::{typecheck_with_fuel, TypeError, DEFAULT_FUEL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_TYPE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "p4typed", version, about = "Type checker and simulator for typed P4Runtime client programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Typecheck a client program against server configurations.
    Typecheck(TypecheckArgs),
    /// Translate a P4Info file into type declarations.
    Encode(EncodeArgs),
    /// Run a scenario until every client is a value.
    Run(RunArgs),
    /// Check that a scenario network is well typed.
    CheckNetwork(CheckArgs),
}

#[derive(Debug, Args)]
pub struct TypecheckArgs {
    pub program: PathBuf,
    /// Server configuration as NAME=PATH; NAME defaults to the file stem.
    #[arg(long = "p4info", value_name = "[NAME=]PATH")]
    pub p4info: Vec<String>,
    /// Extra type declaration files.
    #[arg(long = "decls", value_name = "PATH")]
    pub decls: Vec<PathBuf>,
    /// Normalization fuel.
    #[arg(long, default_value_t = DEFAULT_FUEL)]
    pub fuel: usize,
    #[arg(long)]
    pub action_wildcards: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    pub p4info: PathBuf,
    /// Prefix of the emitted declarations; defaults to the file stem.
    #[arg(long)]
    pub prefix: Option<String>,
    #[arg(long)]
    pub action_wildcards: bool,
    /// Print the encoded types as JSON instead of declarations.
    #[arg(long)]
    pub json: bool,
    #[arg(short, long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub scenario: PathBuf,
    /// Maximum number of network steps.
    #[arg(long, default_value_t = 10_000)]
    pub fuel: usize,
    /// Re-typecheck clients after every step.
    #[arg(long)]
    pub check_invariants: bool,
    #[arg(long)]
    pub json: bool,
    /// Write the JSON trace and final state to a file.
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub scenario: PathBuf,
    #[arg(long)]
    pub json: bool,
}

/// Parse arguments and run a command, writing to the given streams.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_IO;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    let r = match cli.command {
        Command::Typecheck(a) => typecheck_cmd(&a, out),
        Command::Encode(a) => encode_cmd(&a, out),
        Command::Run(a) => run_cmd(&a, out),
        Command::CheckNetwork(a) => check_cmd(&a, out),
    };
    match r {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

struct Failure(i32, String);

fn io_fail(e: impl std::fmt::Display) -> Failure {
    Failure(EXIT_IO, e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_fail(format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, s: &str) -> Result<(), Failure> {
    out.write_all(s.as_bytes()).map_err(io_fail)
}

fn stem(path: &Path) -> String {
    let s = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "config".into());
    s.trim_end_matches(".p4info").replace(['-', '.'], "_")
}

pub fn type_error_json(e: &TypeError) -> Value {
    json!({
        "kind": e.kind,
        "location": e.location,
        "expected": e.expected.as_ref().map(print_type),
        "actual": e.actual.as_ref().map(print_type),
        "message": e.to_string(),
    })
}

fn typecheck_cmd(a: &TypecheckArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let mut scope = ClientScope::default();
    for spec in &a.p4info {
        let (name, path) = match spec.split_once('=') {
            Some((n, p)) => (n.to_string(), PathBuf::from(p)),
            None => (stem(Path::new(spec)), PathBuf::from(spec)),
        };
        let cfg = load_config(&path, EncodeOptions { action_wildcards: a.action_wildcards }).map_err(io_fail)?;
        scope.add_server(&ServerState::new(name, cfg));
    }
    let mut decls: IndexMap<_, _> = scope.decls.clone();
    for d in &a.decls {
        let prog = parse_program_with(&decls, &read(d)?).map_err(|e| io_fail(format!("{}:{e}", d.display())))?;
        decls = prog.decls;
    }
    scope.decls = decls;
    let src = read(&a.program)?;
    let term = scope.parse(&a.program.display().to_string(), &src).map_err(io_fail)?;
    match typecheck_with_fuel(&scope.env(), &term, a.fuel) {
        Ok(t) => {
            if a.json {
                let j = json!({ "ok": true, "type": print_type(&t), "ast": type_to_json(&t) });
                emit(out, &format!("{j:#}\n"))?;
            } else {
                emit(out, &format!("{}\n", print_type(&t)))?;
            }
            Ok(EXIT_OK)
        }
        Err(e) => {
            if a.json {
                emit(out, &format!("{:#}\n", json!({ "ok": false, "error": type_error_json(&e) })))?;
            } else {
                emit(out, &format!("type error: {e}\n"))?;
            }
            Ok(EXIT_TYPE)
        }
    }
}

fn encode_cmd(a: &EncodeArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let cfg = load_config(&a.p4info, EncodeOptions { action_wildcards: a.action_wildcards }).map_err(io_fail)?;
    let prefix = a.prefix.clone().unwrap_or_else(|| stem(&a.p4info));
    let text = if a.json {
        let sig = encode_config(&cfg);
        format!("{:#}\n", json!({ "tm": type_to_json(&sig.tm), "ta": type_to_json(&sig.ta), "tp": type_to_json(&sig.tp) }))
    } else {
        let text = emit_type_decls(&cfg, &prefix);
        parse_program(&text).map_err(|e| io_fail(format!("emitted declarations do not parse: {e}")))?;
        text
    };
    match &a.output {
        Some(p) => fs::write(p, text).map_err(|e| io_fail(format!("{}: {e}", p.display())))?,
        None => emit(out, &text)?,
    }
    Ok(EXIT_OK)
}

fn run_cmd(a: &RunArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let net = load_scenario(&a.scenario).map_err(io_fail)?;
    let diags = net.diagnostics();
    if !diags.is_empty() {
        for d in &diags {
            emit(out, &format!("ill-typed network: {d}\n"))?;
        }
        return Ok(EXIT_TYPE);
    }
    let run = net.run(RunOptions { fuel: a.fuel, check_invariants: a.check_invariants });
    let j = run.to_json();
    if let Some(p) = &a.trace {
        fs::write(p, format!("{j:#}\n")).map_err(|e| io_fail(format!("{}: {e}", p.display())))?;
    }
    if a.json {
        emit(out, &format!("{j:#}\n"))?;
    } else {
        for ev in &run.trace {
            let line = match &ev.label {
                Label::Tau => format!("{:>4} {}: tau\n", ev.step, ev.client),
                Label::Op { kind, payload, response, .. } => format!(
                    "{:>4} {}: {}{} -> {} @ {}\n",
                    ev.step,
                    ev.client,
                    kind.label(),
                    payload.as_ref().map(|p| format!(" {}", print_ground(p))).unwrap_or_default(),
                    short(response),
                    ev.server.as_deref().unwrap_or("?"),
                ),
            };
            emit(out, &line)?;
        }
        for c in &run.network.clients {
            emit(out, &format!("client {} = {}\n", c.id, print_term(&c.term)))?;
        }
        for s in &run.network.servers {
            emit(out, &format!("server {}: {} entities, {} channels\n", s.name(), s.entities.len(), s.channels.len()))?;
        }
        emit(out, &format!("status: {}\n", status_line(&run.status)))?;
    }
    Ok(if run.is_terminal() { EXIT_OK } else { EXIT_RUNTIME })
}

fn short(v: &GroundValue) -> String {
    match v {
        GroundValue::Chan { id, .. } => format!("chan({:?}, {})", id.server, id.index),
        GroundValue::Addr { name, .. } => format!("addr({name:?})"),
        _ => print_ground(v),
    }
}

fn status_line(s: &RunStatus) -> String {
    match s {
        RunStatus::Terminal => "terminal".into(),
        RunStatus::FuelExhausted => "fuel exhausted".into(),
        RunStatus::Deadlock { detail } => format!("deadlock: {detail}"),
        RunStatus::Stuck { client, detail } => format!("client {client} stuck: {detail}"),
        RunStatus::PreservationViolation { client, before, after } => {
            format!("client {client} changed type from {before} to {after}")
        }
        RunStatus::OwnershipViolation { detail } => format!("channel ownership violated: {detail}"),
    }
}

fn check_cmd(a: &CheckArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let net = load_scenario(&a.scenario).map_err(io_fail)?;
    let diags = net.diagnostics();
    if a.json {
        emit(out, &format!("{:#}\n", json!({ "well_typed": diags.is_empty(), "diagnostics": diags })))?;
    } else if diags.is_empty() {
        emit(out, "network is well typed\n")?;
    } else {
        for d in &diags {
            emit(out, &format!("{d}\n"))?;
        }
    }
    Ok(if diags.is_empty() { EXIT_OK } else { EXIT_TYPE })
}
