//! JSON and text renderings. JSON objects use sorted keys, so output is
//! byte-stable for identical inputs.

use std::collections::BTreeMap;
use std::fmt::Write;

use pitower_core::modularity::{
    ClosureResult, DisjointnessOutcome, ModularityReport, SpanOutcome, SpanStatus, WitnessOutcome, WitnessSearch,
};
use pitower_core::oracle::{HarnessReport, WitnessStatus};
use pitower_core::spec::TowerSpec;
use pitower_core::tower::{structure_equation, PickertOutcome, PickertSequence, Tower, TowerError};
use serde_json::{json, Value};

pub const SCHEMA: &str = "pitower/1";

pub fn to_json_line(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

pub fn tower_json(spec: &TowerSpec, t: &Tower) -> Value {
    let gens: Vec<Value> = spec
        .gens
        .iter()
        .map(|g| json!({"name": g.name, "q": (spec.p as u64).pow(g.degree_exp), "relation": g.relation.to_string()}))
        .collect();
    json!({"p": spec.p, "params": spec.params, "generators": gens, "dim": t.dim()})
}

pub struct PickertView {
    pub names: Vec<String>,
    pub exponents: Vec<u32>,
    pub equations: Vec<(String, u64, String)>,
    pub outcome: PickertOutcome,
}

pub fn pickert_view(seq: &PickertSequence, outcome: PickertOutcome) -> Result<PickertView, TowerError> {
    let t = &seq.tower;
    let p = t.characteristic() as u64;
    let mut equations = Vec::new();
    for (i, g) in t.generators().iter().enumerate() {
        let (f, _) = structure_equation(seq, i)?;
        equations.push((g.name.clone(), p.pow(seq.exponents[i]), t.fmt_elem(&f)));
    }
    Ok(PickertView {
        names: t.generators().iter().map(|g| g.name.clone()).collect(),
        exponents: seq.exponents.clone(),
        equations,
        outcome,
    })
}

fn pickert_json(v: &PickertView) -> Value {
    let eqs: Vec<Value> = v
        .equations
        .iter()
        .map(|(name, q, f)| json!({"generator": name, "q": q, "f": f}))
        .collect();
    let (outcome, at) = match v.outcome {
        PickertOutcome::Modular => ("modular", Value::Null),
        PickertOutcome::Inconclusive { index } => ("inconclusive", json!(v.names[index])),
    };
    json!({"order": v.names, "exponents": v.exponents, "structure_equations": eqs, "outcome": outcome, "inconclusive_at": at})
}

pub fn pickert_text(v: &PickertView) -> String {
    let mut out = String::new();
    writeln!(out, "order: {}", v.names.join(" ")).unwrap();
    let exps: Vec<String> = v.exponents.iter().map(|e| e.to_string()).collect();
    writeln!(out, "exponents: {}", exps.join(" ")).unwrap();
    for (name, q, f) in &v.equations {
        writeln!(out, "{name}^{q} = {f}").unwrap();
    }
    match v.outcome {
        PickertOutcome::Modular => writeln!(out, "pickert: modular").unwrap(),
        PickertOutcome::Inconclusive { index } => writeln!(out, "pickert: inconclusive at {}", v.names[index]).unwrap(),
    }
    out
}

fn disjointness_json(d: &DisjointnessOutcome) -> Value {
    let levels: BTreeMap<String, Value> = d
        .levels
        .iter()
        .map(|l| (l.level.to_string(), json!({"d1": l.d1, "d2": l.d2, "disjoint": l.disjoint})))
        .collect();
    json!({"modular": d.modular, "levels": levels})
}

fn span_json(s: &SpanOutcome) -> (Value, Value) {
    let mut short = BTreeMap::new();
    let mut detail = BTreeMap::new();
    for l in &s.levels {
        let key = l.level.to_string();
        let (v, status) = match &l.status {
            SpanStatus::Surjective => (json!(true), json!("surjective")),
            SpanStatus::NotSurjective => (json!(false), json!("not_surjective")),
            SpanStatus::Refused { required, ceiling } => {
                (json!("refused"), json!({"refused": {"required": required, "ceiling": ceiling}}))
            }
        };
        short.insert(key.clone(), v);
        detail.insert(
            key,
            json!({"status": status, "span_dim_k": l.span_dim, "diff_dim_k": l.diff_dim, "a_basis_size": l.a_rank}),
        );
    }
    (json!(short), json!({"modular": s.modular, "levels": detail}))
}

fn witness_json(search: &WitnessSearch) -> Value {
    let Some(c) = &search.certificate else {
        return json!({"found": false, "notes": search.notes});
    };
    let t = &search.sequence.tower;
    let c_terms: Vec<String> = c
        .c_terms
        .iter()
        .map(|&r| t.fmt_elem(&t.scale(c.f.coeff(r).expect("support term"), &t.basis(r))))
        .collect();
    let v = &c.verification;
    json!({
        "found": true,
        "z": c.z_name,
        "q": c.q,
        "f": t.fmt_elem(&c.f),
        "C": c_terms,
        "variable": c.variable_name,
        "b1": c.b1,
        "Q": c.big_q,
        "order": v.order,
        "level": v.level,
        "image_of_zq": t.fmt_elem(&v.image_of_zq),
        "image_has_qth_root": v.image_has_qth_root,
        "image_of_xQ": t.fmt_elem(&v.image_of_xq),
        "verified": v.passed(c.big_q),
        "notes": search.notes,
    })
}

fn witness_text(search: &WitnessSearch) -> String {
    let Some(c) = &search.certificate else {
        return "none".into();
    };
    let t = &search.sequence.tower;
    let v = &c.verification;
    format!(
        "z = {}, q = {}, variable {}, b1 = {}, Q = {}, D({}^{}) = {}, order {}, level {}",
        c.z_name,
        c.q,
        c.variable_name,
        c.b1,
        c.big_q,
        c.z_name,
        c.q,
        t.fmt_elem(&v.image_of_zq),
        v.order,
        v.level
    )
}

fn verdict(modular: bool) -> &'static str {
    if modular {
        "modular"
    } else {
        "non_modular"
    }
}

pub struct ModularView<'a> {
    pub spec: &'a TowerSpec,
    pub tower: &'a Tower,
    pub report: &'a ModularityReport,
    pub pickert: Option<PickertView>,
    pub methods: Vec<&'static str>,
}

pub fn modular_json(v: &ModularView) -> Value {
    let r = v.report;
    let mut obj = json!({
        "schema": SCHEMA,
        "tower": tower_json(v.spec, v.tower),
        "methods": v.methods,
        "verdict": verdict(r.modular),
        "disjointness": disjointness_json(&r.disjointness),
        "flags": r.flags,
    });
    let map = obj.as_object_mut().unwrap();
    if let Some(p) = &v.pickert {
        map.insert("pickert".into(), pickert_json(p));
    }
    if let Some(s) = &r.span {
        let (short, detail) = span_json(s);
        map.insert("span".into(), short);
        map.insert("span_detail".into(), detail);
    }
    match &r.witness {
        Some(WitnessOutcome::Found(s) | WitnessOutcome::None(s)) => {
            map.insert("witness".into(), witness_json(s));
        }
        Some(WitnessOutcome::Failed(msg)) => {
            map.insert("witness".into(), json!({"found": false, "error": msg}));
        }
        None => {}
    }
    obj
}

pub fn modular_text(v: &ModularView) -> String {
    let r = v.report;
    let mut out = String::new();
    writeln!(out, "dimension: {}", v.tower.dim()).unwrap();
    if let Some(p) = &v.pickert {
        out.push_str(&pickert_text(p));
    }
    for l in &r.disjointness.levels {
        let word = if l.disjoint { "disjoint" } else { "not disjoint" };
        writeln!(out, "disjointness level {}: d1 = {}, d2 = {}, {word}", l.level, l.d1, l.d2).unwrap();
    }
    if let Some(s) = &r.span {
        for l in &s.levels {
            let status = match &l.status {
                SpanStatus::Surjective => format!("spans ({} = {})", l.span_dim.unwrap(), l.diff_dim),
                SpanStatus::NotSurjective => format!("does not span ({} < {})", l.span_dim.unwrap(), l.diff_dim),
                SpanStatus::Refused { required, ceiling } => format!("refused (needs {required} > {ceiling})"),
            };
            writeln!(out, "span level {}: {status}", l.level).unwrap();
        }
    }
    match &r.witness {
        Some(WitnessOutcome::Found(s) | WitnessOutcome::None(s)) => writeln!(out, "witness: {}", witness_text(s)).unwrap(),
        Some(WitnessOutcome::Failed(msg)) => writeln!(out, "witness: verification failed: {msg}").unwrap(),
        None => {}
    }
    writeln!(out, "verdict: {}", verdict(r.modular).replace('_', "-")).unwrap();
    if !r.flags.is_empty() {
        writeln!(out, "flags: {}", r.flags.join(" ")).unwrap();
    }
    out
}

pub fn closure_json(spec: &TowerSpec, t: &Tower, c: &ClosureResult) -> Value {
    let basis: Vec<String> = c.field.basis(t).iter().map(|e| t.fmt_elem(e)).collect();
    json!({
        "schema": SCHEMA,
        "tower": tower_json(spec, t),
        "closure": {
            "basis": basis,
            "dim_k": c.field.dim(),
            "index": c.index,
            "algebra_dim_k": c.algebra_dim,
            "is_base_field": c.field.dim() == 1,
            "modular_over_closure": disjointness_json(&c.verification),
        },
    })
}

pub fn closure_text(t: &Tower, c: &ClosureResult) -> String {
    let mut out = String::new();
    writeln!(out, "closure dimension over K: {}", c.field.dim()).unwrap();
    writeln!(out, "index [L:E]: {}", c.index).unwrap();
    writeln!(out, "operator algebra dimension over K: {}", c.algebra_dim).unwrap();
    for e in c.field.basis(t) {
        writeln!(out, "  {}", t.fmt_elem(&e)).unwrap();
    }
    let word = if c.verification.modular { "modular" } else { "not modular" };
    writeln!(out, "L/E: {word}").unwrap();
    out
}

fn witness_status(w: WitnessStatus) -> Value {
    match w {
        WitnessStatus::Found { level } => json!({"found": true, "level": level}),
        WitnessStatus::None => json!({"found": false}),
        WitnessStatus::VerificationFailed => json!("verification_failed"),
        WitnessStatus::NotRun => Value::Null,
    }
}

pub fn harness_json(seed: u64, count: usize, h: &HarnessReport) -> Value {
    let rows: Vec<Value> = h
        .rows
        .iter()
        .map(|r| {
            json!({
                "label": r.label,
                "dim": r.dim,
                "exponents": r.exponents,
                "pickert": if r.pickert_modular { "modular" } else { "inconclusive" },
                "disjointness": verdict(r.disjoint_modular),
                "span": match r.span_modular { Some(m) => json!(verdict(m)), None => json!("refused") },
                "span_refused_levels": r.span_refused_levels,
                "witness": witness_status(r.witness),
                "flags": r.flags,
                "hard_failure": r.hard_failure,
                "error": r.error,
            })
        })
        .collect();
    json!({
        "schema": SCHEMA,
        "seed": seed,
        "count": count,
        "rows": rows,
        "hard_failures": h.hard_failures,
        "span_discrepancies": h.span_discrepancies,
        "span_refusals": h.span_refusals,
    })
}

pub fn harness_text(h: &HarnessReport) -> String {
    let mut out = String::new();
    for r in &h.rows {
        let span = match r.span_modular {
            Some(m) => verdict(m).to_string(),
            None => "refused".into(),
        };
        let witness = match r.witness {
            WitnessStatus::Found { level } => format!("found@{level}"),
            WitnessStatus::None => "none".into(),
            WitnessStatus::VerificationFailed => "failed".into(),
            WitnessStatus::NotRun => "-".into(),
        };
        let mark = if r.hard_failure { "  HARD FAILURE" } else { "" };
        writeln!(
            out,
            "{:<14} N={:<3} pickert={:<12} disjoint={:<11} span={:<11} witness={:<8}{}{}",
            r.label,
            r.dim,
            if r.pickert_modular { "modular" } else { "inconclusive" },
            verdict(r.disjoint_modular),
            span,
            witness,
            r.error.as_deref().map(|e| format!(" error: {e}")).unwrap_or_default(),
            mark
        )
        .unwrap();
    }
    writeln!(
        out,
        "hard failures: {}, span discrepancies: {}, span refusals: {}",
        h.hard_failures, h.span_discrepancies, h.span_refusals
    )
    .unwrap();
    out
}
