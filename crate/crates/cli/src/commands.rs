use num_bigint::BigUint;
use serde_json::{json, Map, Value};

use elated::cycles::{enumerate_cycles_with_bound, matches_reference, Dynamics};
use elated::digitmap::render;
use elated::heights::{
    epsilon_base2, epsilon_base3, epsilon_with, recurrence_record, sigma_with, EpsilonRecord, EpsilonValue,
};
use elated::preimage::{compute_base_constants, preimages, reduce_preimages, PreimageSet};
use elated::sequences::{
    build_even_consecutive_run_with, build_non_elated_run_with, build_u_attracted_run_with, Evidence,
    RunCertificate,
};
use elated::towerint::{build_epsilon_tower, verify_epsilon_tower, Checker, RunSymbolic, TowerConfig, TowerInt};
use elated::{Base, DigitMap, Error, Exponent, MapKind};

use crate::cache::Cache;
use crate::output::Output;
use crate::{CliError, Command, SequenceKind};

type Dispatched = (&'static str, Map<String, Value>, Output);

pub fn dispatch(cmd: &Command, cache: &Cache, cap: u64) -> Result<Dispatched, CliError> {
    match cmd {
        Command::Cycles { base, exp, bound } => cycles(*base, *exp, *bound),
        Command::Height { n, base, happy } => height(n, *base, *happy, cache, cap),
        Command::Epsilon { k, base, limit } => minimal("epsilon", *k, *base, limit.as_deref(), cache, cap),
        Command::Sigma { k, base, limit } => minimal("sigma", *k, *base, limit.as_deref(), cache, cap),
        Command::Preimage { a, base, reduced } => preimage(a, *base, *reduced, cap),
        Command::Constants { base } => constants(*base),
        Command::Sequence { kind, base, length, target, ceiling } => {
            sequence(*kind, *base, *length, *target, *ceiling, cap)
        }
        Command::VerifyTowers { k, primes } => towers(*k, *primes),
    }
}

fn base_of(b: u32) -> Result<Base, CliError> {
    Ok(Base::new(b)?)
}

fn parse_big(s: &str) -> Result<BigUint, CliError> {
    s.parse::<BigUint>()
        .map_err(|_| Error::Precondition(format!("{s:?} is not a nonnegative decimal integer")).into())
}

fn params(pairs: &[(&str, Value)]) -> Map<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn decimal_digits(n: &BigUint) -> u64 {
    (n.bits() as f64 * std::f64::consts::LOG10_2).floor() as u64 + 1
}

/// Decimal value when within the cap, and the base-b rendering (run-length above the cap).
fn show(n: &BigUint, base: Base, cap: u64) -> (Value, String) {
    if decimal_digits(n) <= cap {
        (Value::String(n.to_string()), render(n, base))
    } else {
        let runs = RunSymbolic::from_value(n, base).map(|r| r.to_string()).unwrap_or_default();
        (Value::Null, runs)
    }
}

fn strings(v: &[BigUint]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

fn cycles(b: u32, e: u32, bound: Option<u64>) -> Result<Dispatched, CliError> {
    let base = base_of(b)?;
    let map = DigitMap::new(base, Exponent::new(e)?, MapKind::Elated);
    let set = enumerate_cycles_with_bound(map, bound)?;
    let list: Vec<Value> = set
        .cycles
        .iter()
        .map(|c| json!({ "members": c.members(), "rendered": c.render(base) }))
        .collect();
    let rows = set
        .cycles
        .iter()
        .map(|c| {
            let members: Vec<String> = c.members().iter().map(u64::to_string).collect();
            vec![c.len().to_string(), members.join(" "), c.render(base)]
        })
        .collect();
    let results = json!({
        "base": b,
        "exponent": e,
        "cycles": list,
        "matches_reference": matches_reference(&set),
    });
    let out = Output {
        status: "ok",
        results,
        columns: vec!["length", "members", "rendered"],
        rows,
        text: vec![format!("{b} & {}", set)],
    };
    Ok(("cycles", params(&[("base", json!(b)), ("exp", json!(e)), ("bound", json!(bound))]), out))
}

fn height(n: &str, b: u32, happy: bool, cache: &Cache, cap: u64) -> Result<Dispatched, CliError> {
    let base = base_of(b)?;
    let map = if happy { DigitMap::happy(base) } else { DigitMap::elated(base) };
    let value = parse_big(n)?;
    if value == BigUint::from(0u32) {
        return Err(Error::Zero.into());
    }
    let table = cache.table(map)?;
    let h = table.height(&value)?;
    let trajectory = table.trajectory(&value)?.unwrap_or_default();
    let attractor = Dynamics::new(map)?.attractor(&value)?;
    let (dec, rendered) = show(&value, base, cap);
    let results = json!({
        "n": dec,
        "rendered": rendered,
        "map": map.kind.name(),
        "height": h,
        "trajectory": strings(&trajectory),
        "attractor": attractor,
    });
    let hs = h.map_or("none".to_string(), |h| h.to_string());
    let text = vec![
        format!("{rendered}: height {hs} ({} map, base {b})", map.kind.name()),
        format!(
            "reaches {} after {} steps",
            render(&BigUint::from(attractor.representative), base),
            attractor.steps
        ),
    ];
    let out = Output {
        status: "ok",
        results,
        columns: vec!["n", "height", "representative", "steps"],
        rows: vec![vec![n.to_string(), hs, attractor.representative.to_string(), attractor.steps.to_string()]],
        text,
    };
    let p = params(&[("n", json!(n)), ("base", json!(b)), ("happy", json!(happy))]);
    Ok(("height", p, out))
}

fn minimal(
    name: &'static str,
    k: u64,
    b: u32,
    limit: Option<&str>,
    cache: &Cache,
    cap: u64,
) -> Result<Dispatched, CliError> {
    let base = base_of(b)?;
    let elated = name == "epsilon";
    let map = if elated { DigitMap::elated(base) } else { DigitMap::happy(base) };
    let limit = limit.map(parse_big).transpose()?;
    let table = cache.table(map)?;

    let (record, method): (EpsilonRecord, &str) = if elated && limit.is_none() && b == 10 && (13..=16).contains(&k) {
        let t = build_epsilon_tower(&Checker::default())?;
        let value = [t.epsilon13, t.epsilon14, t.epsilon15, t.epsilon16][(k - 13) as usize].clone();
        (recurrence_record(&table, k, value, cap)?, "tower")
    } else {
        let found = if elated { epsilon_with(&table, k, limit.as_ref()) } else { sigma_with(&table, k, limit.as_ref()) };
        match found {
            Ok(r) => (r, "search"),
            Err(Error::LimitExceeded { .. }) if elated && limit.is_none() && (b == 2 || b == 3) => {
                let runs = if b == 2 { epsilon_base2(k)? } else { epsilon_base3(k)? };
                (recurrence_record(&table, k, runs, cap)?, "recurrence")
            }
            Err(e) => return Err(e.into()),
        }
    };

    let (dec, rendered) = match &record.value {
        EpsilonValue::Exact(v) => show(v, base, cap),
        EpsilonValue::Runs(r) => (Value::Null, r.to_string()),
    };
    let results = json!({
        "k": k,
        "base": b,
        "map": map.kind.name(),
        "method": method,
        "value": dec,
        "rendered": rendered,
        "trajectory": strings(&record.trajectory),
        "limit": record.limit.as_ref().map(|l| l.to_string()),
    });
    let out = Output {
        status: "ok",
        results,
        columns: vec!["k", "base", "value", "rendered", "method"],
        rows: vec![vec![
            k.to_string(),
            b.to_string(),
            dec.as_str().unwrap_or("").to_string(),
            rendered.clone(),
            method.into(),
        ]],
        text: vec![format!("{name}({k}, {b}) = {rendered}")],
    };
    let p = params(&[("k", json!(k)), ("base", json!(b)), ("limit", json!(limit.map(|l| l.to_string())))]);
    Ok((name, p, out))
}

fn member_values(set: &PreimageSet, cap: u64) -> Vec<Value> {
    set.members
        .iter()
        .map(|m| match m.len_u64() {
            Some(l) if l <= cap => m.to_biguint(cap).map(|v| Value::String(v.to_string())).unwrap_or(Value::Null),
            _ => Value::Null,
        })
        .collect()
}

fn preimage(a: &str, b: u32, reduced: bool, cap: u64) -> Result<Dispatched, CliError> {
    let base = base_of(b)?;
    let target = parse_big(a)?;
    let set = if reduced { reduce_preimages(&target, base)? } else { preimages(&target, base)? };
    let members: Vec<String> = set.members.iter().map(|m| m.to_string()).collect();
    let mut results = json!({
        "a": a,
        "base": b,
        "reduced_target": set.reduced_target,
        "appended": set.appended.to_string(),
        "members": members,
        "values": member_values(&set, cap),
    });
    let mut text = vec![format!("S({a}) in base {b}: {{{}}}", members.join(", "))];
    if reduced {
        let stripped: Vec<String> = set.stripped().iter().map(|d| d.iter().map(u32::to_string).collect()).collect();
        results["stripped"] = json!(stripped);
        text.push(format!("reduces to S({}) with {} trailing digits {} appended", set.reduced_target, set.appended, b - 1));
    }
    let rows = members.iter().map(|m| vec![a.to_string(), m.clone()]).collect();
    let out = Output { status: "ok", results, columns: vec!["a", "member"], rows, text };
    Ok(("preimage", params(&[("a", json!(a)), ("base", json!(b)), ("reduced", json!(reduced))]), out))
}

fn constants(b: u32) -> Result<Dispatched, CliError> {
    let c = compute_base_constants(base_of(b)?)?;
    let results = json!({
        "base": b,
        "a_star": c.a_star,
        "c": c.c,
        "window": c.window,
        "period": c.period(),
        "threshold": c.threshold(),
        "at_boundary": c.at_boundary,
    });
    let out = Output {
        status: "ok",
        results,
        columns: vec!["base", "a_star", "c"],
        rows: vec![vec![b.to_string(), c.a_star.to_string(), c.c.to_string()]],
        text: vec![format!("base {b}: a* = {}, C = {}", c.a_star, c.c)],
    };
    Ok(("constants", params(&[("base", json!(b))]), out))
}

fn sequence(
    kind: SequenceKind,
    b: u32,
    length: usize,
    target: Option<u64>,
    ceiling: u64,
    cap: u64,
) -> Result<Dispatched, CliError> {
    let base = base_of(b)?;
    let cert: RunCertificate = match kind {
        SequenceKind::Attracted => build_u_attracted_run_with(length, base, target.unwrap_or(1), ceiling)?,
        SequenceKind::Consecutive => {
            let u = match target {
                Some(u) => u,
                None => elated::cycles::enumerate_cycles(base, Exponent::SQUARE)?
                    .members()
                    .filter(|u| u % 2 == 0)
                    .min()
                    .ok_or_else(|| Error::Precondition(format!("no even cycle member in base {b}")))?,
            };
            build_even_consecutive_run_with(length, base, u, ceiling)?
        }
        SequenceKind::Nonelated => build_non_elated_run_with(length, base, target, ceiling)?,
    };
    let checker = Checker::default();
    cert.verify(&checker)?;
    let exact = cert.verify_exact()?.is_some();

    let mut results = serde_json::to_value(&cert).expect("certificates serialize");
    results["verification"] = json!({ "primes": checker.trials(), "exact": exact });

    let mut rows = Vec::new();
    let mut text = vec![format!(
        "{} run of {} numbers in base {b}, difference {}, target {}",
        kind_name(kind),
        cert.elements.len(),
        cert.d,
        cert.u
    )];
    text.push(format!("witness: n = {}, k = {}, r = {}", cert.witness.n, cert.witness.k, cert.witness.r));
    for (i, e) in cert.elements.iter().enumerate() {
        let (how, steps) = match &e.evidence {
            Evidence::Chain { chain } => ("chain", chain.len() - 1),
            Evidence::EvenParity => ("even-parity", 0),
        };
        let value = tower_text(&e.value, cap);
        text.push(format!("  {i}: {value} [{how}, {steps} steps]"));
        rows.push(vec![i.to_string(), value, how.to_string(), steps.to_string()]);
    }
    text.push(format!("verified modulo {} primes{}", checker.trials(), if exact { " and exactly" } else { "" }));
    let out = Output { status: "verified", results, columns: vec!["index", "value", "evidence", "steps"], rows, text };
    let p = params(&[
        ("kind", json!(kind_name(kind))),
        ("base", json!(b)),
        ("length", json!(length)),
        ("target", json!(target)),
        ("ceiling", json!(ceiling)),
    ]);
    Ok(("sequence", p, out))
}

/// Decimal for literals within the cap, the expression otherwise.
fn tower_text(x: &TowerInt, cap: u64) -> String {
    match x.as_literal() {
        Some(n) if decimal_digits(n) <= cap => n.to_string(),
        _ => x.to_string(),
    }
}

fn kind_name(kind: SequenceKind) -> &'static str {
    match kind {
        SequenceKind::Attracted => "attracted",
        SequenceKind::Consecutive => "consecutive",
        SequenceKind::Nonelated => "nonelated",
    }
}

fn towers(k: u32, primes: usize) -> Result<Dispatched, CliError> {
    if primes == 0 {
        return Err(Error::Precondition("at least one verification prime is required".into()).into());
    }
    let report = verify_epsilon_tower(k, &TowerConfig { trials: primes, ..TowerConfig::default() })?;
    let mut rows = Vec::new();
    let mut text = vec![format!("ε{k} = {} = {}", report.closed_form, report.epsilon)];
    for c in &report.congruences {
        rows.push(vec!["congruence".into(), format!("{} ≡ {} (mod {})", c.label, c.computed, c.modulus), "checked".into()]);
        text.push(format!("  {} ≡ {} (mod {})", c.label, c.computed, c.modulus));
    }
    for d in &report.descent {
        rows.push(vec!["descent".into(), d.label.clone(), d.method.clone()]);
        text.push(format!("  {} [{}]", d.label, d.method));
    }
    for c in &report.checks {
        rows.push(vec!["check".into(), c.label.clone(), c.trust.to_string()]);
        text.push(format!("  {} [{}]", c.label, c.trust));
    }
    let chain: Vec<String> = report.chain.iter().map(|l| l.value.clone()).collect();
    text.push(format!("  height {}: {}", report.height, chain.join(" -> ")));
    let results = serde_json::to_value(&report).expect("reports serialize");
    let out = Output { status: "verified", results, columns: vec!["section", "statement", "method"], rows, text };
    Ok(("verify-towers", params(&[("k", json!(k)), ("primes", json!(primes))]), out))
}
