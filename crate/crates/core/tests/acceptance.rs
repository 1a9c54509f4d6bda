//! Acceptance suite: one pass/fail line per criterion.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use p4typed::encoding::{encode_config, load_p4info, parse_p4info, to_config};
use p4typed::network::{Network, RunOptions, RunStatus};
use p4typed::scenario::{load_scenario, ClientScope};
use p4typed::server::{conforms, conforms_sig, eval_read, Entity};
use p4typed::syntax::{parse_term, parse_type, print_type};
use p4typed::typing::{
    disjoint, normalize_type, subtype, type_valid, typecheck, TypeErrorKind, TypingEnv, DEFAULT_FUEL,
};
use p4typed::{alpha_eq, sugar, ChanSig, GroundValue, OpKind, Term, Type};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn samples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../samples")
}

fn read_sample(rel: &str) -> String {
    std::fs::read_to_string(samples().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

fn ty(s: &str) -> Type {
    parse_type(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn empty() -> TypingEnv {
    TypingEnv::new()
}

// ---- 1 ----

fn flat_example_sig() -> ChanSig {
    ChanSig::new(
        ty("forall T. T match { \"IPv4_table\" => {name: \"IPv4_dst_addr\", value: Bytes, prefixLen: Int}, \
            \"IPv6_table\" => {name: \"IPv6_dst_addr\", value: Bytes, prefixLen: Int} }"),
        ty("forall T. T match { \"IPv4_table\" => \"IPv4_forward\" | \"Drop\", \
            \"IPv6_table\" => \"IPv6_forward\" | \"Drop\" }"),
        ty("forall A. A match { \"IPv4_forward\" => {mac_dst: Bytes, port: Bytes}, \
            \"IPv6_forward\" => {mac_dst: Bytes, port: Bytes}, \"Drop\" => Unit }"),
    )
}

fn discriminates(sig: ChanSig, matches: &str) -> Result<(), String> {
    let env = empty().with_term("s", Type::chan(sig));
    let insert = |action: &str| {
        parse_term(&format!(
            "Insert(s, {{name = \"IPv4_table\", matches = {matches}, action = \"{action}\", \
             params = {{mac_dst = b(8, 0, 0, 0, 10, 1), port = b(1)}}}})"
        ))
        .unwrap()
    };
    match typecheck(&env, &insert("IPv4_forward")) {
        Ok(t) if t == Type::BOOL => {}
        Ok(t) => return Err(format!("IPv4_forward typed as {}", print_type(&t))),
        Err(e) => return Err(format!("IPv4_forward rejected: {e}")),
    }
    match typecheck(&env, &insert("IPv6_forward")) {
        Err(e) if e.kind == TypeErrorKind::NotSubtype && e.location.contains("`action`") => Ok(()),
        Err(e) => Err(format!("IPv6_forward rejected with the wrong error: {e}")),
        Ok(t) => Err(format!("IPv6_forward accepted as {}", print_type(&t))),
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let flat = discriminates(flat_example_sig(), "{name = \"IPv4_dst_addr\", value = b(10, 1, 0, 0), prefixLen = 32}");
    let cfg = load_p4info(&read_sample("p4info/dual_stack.p4info.json")).unwrap();
    let encoded = discriminates(
        encode_config(&cfg),
        "{IPv4_dst_addr = {some = {value = b(10, 1, 0, 0), prefixLen = 32}}}",
    );
    let elapsed = start.elapsed();
    match (flat, encoded) {
        (Ok(()), Ok(())) => outcome(
            elapsed < Duration::from_secs(1),
            format!("Bool for IPv4_forward, not-subtype at `action` for IPv6_forward, both signatures, {elapsed:.2?}"),
        ),
        (a, b) => outcome(false, format!("example types: {a:?}; encoded types: {b:?}")),
    }
}

// ---- 2 ----

/// Rewrite the flat `{name: <f>, value: Bytes, prefixLen: Bytes}` LPM field
/// records into `{f: Option {value: Bytes, prefixLen: Int}} | "*"`.
fn definition_shape(tm: &Type) -> Type {
    let Type::Forall(x, bound, body) = tm else { panic!("not a forall") };
    let Type::Match(scrut, cases) = &**body else { panic!("not a match") };
    let mut cases: Vec<(Type, Type)> = cases
        .iter()
        .map(|(p, k)| {
            let Type::Record(fs) = k else { panic!("case is not a record") };
            let field = match &fs.iter().find(|(l, _)| l == "name").unwrap().1 {
                Type::Singleton(v) => match &**v {
                    GroundValue::Str(f) => f.clone(),
                    _ => panic!("name is not a string singleton"),
                },
                _ => panic!("name is not a singleton"),
            };
            let lpm = sugar::option_expanded(Type::record([("value", Type::BYTES), ("prefixLen", Type::INT)]));
            (p.clone(), Type::union(Type::record([(field, lpm)]), Type::wildcard()))
        })
        .collect();
    cases.push((Type::wildcard(), Type::wildcard()));
    Type::Forall(x.clone(), bound.clone(), Box::new(Type::match_type((**scrut).clone(), cases)))
}

fn with_wildcard_case(t: &Type, cont: Type) -> Type {
    let Type::Forall(x, bound, body) = t else { panic!("not a forall") };
    let Type::Match(scrut, cases) = &**body else { panic!("not a match") };
    let mut cases = cases.clone();
    cases.push((Type::wildcard(), cont));
    Type::Forall(x.clone(), bound.clone(), Box::new(Type::match_type((**scrut).clone(), cases)))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let doc = parse_p4info(&read_sample("p4info/dual_stack.p4info.json")).unwrap();
    let sig = encode_config(&to_config(&doc).unwrap());
    let printed_tm = ty("forall T. T match { \
        \"IPv4_table\" => {name: \"IPv4_dst_addr\", value: Bytes, prefixLen: Bytes}, \
        \"IPv6_table\" => {name: \"IPv6_dst_addr\", value: Bytes, prefixLen: Bytes} }");
    let printed_ta = ty("forall T. T match { \"IPv4_table\" => \"IPv4_forward\" | \"Drop\", \
        \"IPv6_table\" => \"IPv6_forward\" | \"Drop\" }");
    let printed_tp = ty("forall A. A match { \"IPv4_forward\" => {mac_dst: Bytes, port: Bytes}, \
        \"IPv6_forward\" => {mac_dst: Bytes, port: Bytes}, \"Drop\" => Unit }");
    let want = ChanSig::new(
        definition_shape(&printed_tm),
        with_wildcard_case(&printed_ta, Type::wildcard()),
        with_wildcard_case(&printed_tp, Type::UNIT),
    );
    let same = [alpha_eq(&sig.tm, &want.tm), alpha_eq(&sig.ta, &want.ta), alpha_eq(&sig.tp, &want.tp)];
    let elapsed = start.elapsed();
    outcome(
        same.iter().all(|b| *b) && elapsed < Duration::from_secs(1),
        format!("Tm/Ta/Tp alpha-equal: {same:?}, {elapsed:.2?}"),
    )
}

// ---- 3 ----

fn criterion_3() -> Outcome {
    let a = normalize_type(
        &empty(),
        &ty("(forall X. X match { Int => 42, Bool => \"Hello\" }) 'true"),
        DEFAULT_FUEL,
    );
    let b = normalize_type(&empty(), &ty("Int match { Int => Bool, String => Unit }"), DEFAULT_FUEL);
    let ok_a = a.as_ref().is_ok_and(|t| *t == Type::str_singleton("Hello"));
    let ok_b = b.as_ref().is_ok_and(|t| *t == Type::BOOL);
    let show = |r: &Result<Type, _>| match r {
        Ok(t) => print_type(t),
        Err(e) => format!("{e}"),
    };
    outcome(ok_a && ok_b, format!("{} and {}", show(&a), show(&b)))
}

// ---- 4 ----

fn criterion_4() -> Outcome {
    let net = load_scenario(&samples().join("simple_insert/scenario.toml")).unwrap();
    if !net.well_typed() {
        return outcome(false, format!("scenario ill-typed: {:?}", net.diagnostics()));
    }
    let before = net.servers[0].clone();
    let run = net.run(RunOptions { fuel: 100, check_invariants: true });
    let after = &run.network.servers[0];
    let v = Entity::new(
        "IPv4_table",
        GroundValue::record([(
            "IPv4_dst_addr",
            GroundValue::record([(
                "some",
                GroundValue::record([
                    ("value", GroundValue::Bytes(vec![10, 1, 0, 0])),
                    ("prefixLen", GroundValue::Int(16)),
                ]),
            )]),
        )]),
        "IPv4_forward",
        GroundValue::record([
            ("mac_dst", GroundValue::Bytes(vec![8, 0, 0, 0, 1, 17])),
            ("port", GroundValue::Bytes(vec![1])),
        ]),
    );
    let mut want_entities = before.entities.clone();
    want_entities.push(v);
    let gained: Vec<_> = after.channels.difference(&before.channels).collect();
    let checks = [
        ("terminal", run.status == RunStatus::Terminal),
        ("client is true", run.network.clients[0].term == Term::bool(true)),
        ("one channel gained", gained.len() == 1 && before.channels.is_subset(&after.channels)),
        ("entity gained", after.entities == want_entities),
        ("at most 4 steps", run.trace.len() <= 4),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    outcome(failed.is_empty(), format!("{} steps, failed checks: {failed:?}", run.trace.len()))
}

// ---- 5 and 6 ----

struct SoundnessReport {
    networks: usize,
    attempts: usize,
    steps: usize,
    preservation: Vec<String>,
    progress: Vec<String>,
    elapsed: Duration,
}

fn soundness_suite(target: usize) -> SoundnessReport {
    let start = Instant::now();
    let mut r = common::rng(0x5eed_0001);
    let mut rep = SoundnessReport {
        networks: 0,
        attempts: 0,
        steps: 0,
        preservation: Vec::new(),
        progress: Vec::new(),
        elapsed: Duration::ZERO,
    };
    while rep.networks < target && rep.attempts < target * 20 {
        rep.attempts += 1;
        let net = common::gen_network(&mut r);
        if !net.well_typed() {
            continue;
        }
        rep.networks += 1;
        check_run(&net, rep.networks, &mut rep);
    }
    rep.elapsed = start.elapsed();
    rep
}

fn check_run(net: &Network, n: usize, rep: &mut SoundnessReport) {
    let env = empty();
    let initial: Vec<Type> = net.clients.iter().map(|c| typecheck(&env, &c.term).unwrap()).collect();
    let mut net = net.clone();
    for i in 0..10_000 {
        if net.is_terminal() {
            return;
        }
        match net.step(i) {
            Ok(Some((_, next))) => {
                rep.steps += 1;
                for (c, before) in next.clients.iter().zip(&initial) {
                    match typecheck(&env, &c.term) {
                        Ok(t) if subtype(&env, &t, before) => {}
                        Ok(t) => rep.preservation.push(format!(
                            "network {n} client {}: {} is not below {}",
                            c.id,
                            print_type(&t),
                            print_type(before)
                        )),
                        Err(e) => rep.preservation.push(format!("network {n} client {}: {e}", c.id)),
                    }
                }
                if !next.well_typed() {
                    rep.preservation.push(format!("network {n}: {:?}", next.diagnostics()));
                }
                net = next;
            }
            Ok(None) => return,
            Err(e) => {
                rep.progress.push(format!("network {n}: {e:?}"));
                return;
            }
        }
    }
    rep.progress.push(format!("network {n}: did not finish in 10000 steps"));
}

// ---- 7 ----

fn criterion_7() -> Outcome {
    let mut r = common::rng(0x5eed_0007);
    let configs = 8;
    let per_config = 1000;
    let (mut disagree_typing, mut disagree_oracle, mut conformant) = (0, 0, 0);
    let mut first = None;
    for _ in 0..configs {
        let c = common::gen_config(&mut r);
        let sig = encode_config(&c);
        let env = empty().with_term("s", Type::chan(sig.clone()));
        for _ in 0..per_config {
            let v = common::mutated_entity(&mut r, &c);
            let by_entity = Entity::from_value(&v).is_ok_and(|e| conforms(&e, &c));
            let by_value = conforms_sig(&v, &sig);
            let term = Term::op(OpKind::Insert, vec![Term::var("s"), Term::Lit(v.clone())]);
            let by_typing = typecheck(&env, &term).is_ok();
            let by_oracle = common::oracle_conforms(&v, &c);
            conformant += usize::from(by_entity);
            if by_entity != by_typing || by_entity != by_value {
                disagree_typing += 1;
            }
            if by_entity != by_oracle {
                disagree_oracle += 1;
            }
            if (by_entity != by_typing || by_entity != by_oracle) && first.is_none() {
                first = Some(format!(
                    "{} conforms={by_entity} typing={by_typing} oracle={by_oracle}",
                    p4typed::syntax::print_ground(&v)
                ));
            }
        }
    }
    let total = configs * per_config;
    outcome(
        disagree_typing == 0 && disagree_oracle == 0,
        format!(
            "{configs} configs x {per_config} entities, {conformant} conformant, \
             {disagree_typing} typing disagreements, {disagree_oracle} oracle disagreements of {total}{}",
            first.map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    )
}

// ---- 8 ----

fn criterion_8() -> Outcome {
    let mut r = common::rng(0x5eed_0008);
    let pairs = 1000;
    let (mut disagree, mut nonempty) = (0, 0);
    for i in 0..pairs {
        let c = common::gen_config(&mut r);
        let (es, q) = common::gen_store_and_query(&mut r, &c);
        let got = eval_read(&c, &es, &q);
        let want = common::oracle_read(&es, &q);
        nonempty += usize::from(!want.is_empty());
        if got != want {
            disagree += 1;
            if disagree == 1 {
                eprintln!("read mismatch at pair {i}: got {} want {}", got.len(), want.len());
            }
        }
    }
    outcome(disagree == 0, format!("{pairs} pairs, {nonempty} non-empty results, {disagree} disagreements"))
}

// ---- 9 ----

fn criterion_9() -> Outcome {
    let mut r = common::rng(0x5eed_0009);
    let env = empty();
    let (mut sampled, mut disjoint_pairs, mut sub_pairs, mut violations) = (0, 0, 0, Vec::new());
    while sampled < 4000 {
        let (t, u) = common::gen_type_pair(&mut r);
        if !type_valid(&env, &t) || !type_valid(&env, &u) {
            continue;
        }
        sampled += 1;
        let d = disjoint(&env, &t, &u);
        let s = subtype(&env, &t, &u);
        disjoint_pairs += usize::from(d);
        sub_pairs += usize::from(s);
        if d && s {
            violations.push(format!("{} / {}", print_type(&t), print_type(&u)));
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "{sampled} pairs, {disjoint_pairs} disjoint, {sub_pairs} subtype, {} violations{}",
            violations.len(),
            violations.first().map(|v| format!("; first: {v}")).unwrap_or_default()
        ),
    )
}

// ---- 10 ----

fn table_entries<'a>(net: &'a Network, server: &str, table: &str) -> Vec<&'a Entity> {
    net.server(server).unwrap().entities.iter().filter(|e| e.table_name == table).collect()
}

fn criterion_10() -> Outcome {
    let path = samples().join("replication/scenario.toml");
    let net = load_scenario(&path).unwrap();
    if !net.well_typed() {
        return outcome(false, format!("scenario ill-typed: {:?}", net.diagnostics()));
    }
    let run = net.run(RunOptions { fuel: 10_000, check_invariants: true });
    let end = &run.network;
    let s1_lpm: Vec<Entity> = table_entries(&net, "s1", "Process.ipv4_lpm").into_iter().cloned().collect();
    let s3_tbl: Vec<Entity> = table_entries(&net, "s3", "Process.ipv4_table").into_iter().cloned().collect();
    let contains_all = |server: &str, want: &[Entity]| {
        let have = &end.server(server).unwrap().entities;
        want.iter().all(|w| have.contains(w))
    };
    let firewall_ok = ["s1", "s2", "s3", "s4"].iter().all(|s| {
        let fw = table_entries(end, s, "Process.firewall");
        fw.len() == 3 && fw.iter().all(|e| e.action_name == "Process.drop")
    });
    let scope = ClientScope::from_servers(&net.servers);
    let bad = scope.bind(&scope.parse("bad_insert.fp4r", &read_sample("replication/bad_insert.fp4r")).unwrap());
    let rejected = typecheck(&empty(), &bad);
    let checks = [
        ("terminal", run.status == RunStatus::Terminal),
        ("controller returns true", end.clients[0].term == Term::bool(true)),
        ("firewall on all four", firewall_ok),
        ("s1 entries on s2", !s1_lpm.is_empty() && contains_all("s2", &s1_lpm)),
        ("s3 entries on s4", !s3_tbl.is_empty() && contains_all("s4", &s3_tbl)),
        ("ipv4_lpm entry rejected for config2", rejected.is_err()),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let why = match &rejected {
        Err(e) => format!("{:?}", e.kind),
        Ok(t) => print_type(t),
    };
    outcome(
        failed.is_empty(),
        format!(
            "{} steps, {} entries copied to s2, bad insert: {why}, failed checks: {failed:?}",
            run.trace.len(),
            s1_lpm.len()
        ),
    )
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(o) => o,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        }
    }
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome, Duration)> = Vec::new();
    let mut record = |n: u32, name: &'static str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let o = guarded(f);
        let elapsed = start.elapsed();
        println!("criterion {n:>2} [{}] {name}: {} ({elapsed:.2?})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, name, o, elapsed));
    };
    record(1, "action discrimination on insert", &criterion_1);
    record(2, "P4Info encoding", &criterion_2);
    record(3, "match type reduction", &criterion_3);
    record(4, "connect and insert scenario", &criterion_4);

    let rep = std::cell::OnceCell::new();
    let soundness = || rep.get_or_init(|| soundness_suite(1000));
    record(5, "preservation over generated networks", &|| {
        let r = soundness();
        outcome(
            r.networks >= 1000 && r.preservation.is_empty() && r.elapsed <= Duration::from_secs(300),
            format!(
                "{} well-typed networks of {} generated, {} steps, {} violations{}, {:.2?}",
                r.networks,
                r.attempts,
                r.steps,
                r.preservation.len(),
                r.preservation.first().map(|v| format!("; first: {v}")).unwrap_or_default(),
                r.elapsed
            ),
        )
    });
    record(6, "progress over generated networks", &|| {
        let r = soundness();
        outcome(
            r.networks >= 1000 && r.progress.is_empty(),
            format!(
                "{} networks, {} stuck or deadlocked{}",
                r.networks,
                r.progress.len(),
                r.progress.first().map(|v| format!("; first: {v}")).unwrap_or_default()
            ),
        )
    });
    record(7, "conformance agrees with typing", &criterion_7);
    record(8, "read agrees with a single-pass filter", &criterion_8);
    record(9, "disjoint types are never subtypes", &criterion_9);
    record(10, "replication across four switches", &criterion_10);

    let failed = results.iter().filter(|r| !r.2.pass).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
