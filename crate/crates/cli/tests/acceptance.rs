//! End-to-end acceptance run. Each criterion prints one PASS/FAIL line; the
//! test fails if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use pitower_core::coefffield::RatFunc;
use pitower_core::field::Field;
use pitower_core::linops::{lucas, monomial_divided_power, normal_extension, order_bound, Filtration, LinearOperator};
use pitower_core::modularity::{
    find_witness, fixed_field, modular_by_disjointness, modular_by_span, relative_endomorphisms, SpanStatus,
};
use pitower_core::oracle::{
    agreement_harness, brute_order, labelled_corpus, random_element, random_operator, CorpusConfig, WitnessStatus,
};
use pitower_core::semilinear::{pth_root_in_l, DEFAULT_DIM_CEILING};
use pitower_core::spec::{parse_expr, parse_tower, TowerSpec};
use pitower_core::tower::{build_tower, eval_expr, Subfield, Tower, TowerElement};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIXTURES: [&str; 5] = ["t-split", "t-split2", "t-nm1", "t-nm2", "t-tricky"];

fn fixture_path(name: &str) -> String {
    format!("{}/../../fixtures/{name}.tw", env!("CARGO_MANIFEST_DIR"))
}

fn fixture_spec(name: &str) -> TowerSpec {
    parse_tower(&std::fs::read_to_string(fixture_path(name)).unwrap()).unwrap()
}

fn load(name: &str) -> Tower {
    build_tower(&fixture_spec(name)).unwrap()
}

fn el(t: &Tower, text: &str) -> TowerElement {
    let params = t.coeff_field().param_names().to_vec();
    let gens: Vec<String> = t.generators().iter().map(|g| g.name.clone()).collect();
    eval_expr(t, &parse_expr(text, &params, &gens).unwrap(), "<acceptance>").unwrap()
}

fn pitower(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_pitower")).args(args).env_remove("PITOWER_DIM_CEILING").output().unwrap()
}

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture_verdicts() -> Outcome {
    let expected = [("t-split", true), ("t-split2", true), ("t-nm1", false), ("t-nm2", false), ("t-tricky", true)];
    let mut slowest = Duration::ZERO;
    for (name, modular) in expected {
        let start = Instant::now();
        let out = modular_by_disjointness(&load(name));
        let took = start.elapsed();
        slowest = slowest.max(took);
        ensure(out.modular == modular, || format!("{name}: got modular = {}", out.modular))?;
        ensure(took < Duration::from_secs(120), || format!("{name}: took {took:?}"))?;
    }
    Ok(format!("5/5 verdicts exact, slowest {slowest:.2?}"))
}

fn witness_reproduction() -> Outcome {
    let search = find_witness(&load("t-nm1")).map_err(|e| e.to_string())?;
    let w = search.certificate.ok_or("t-nm1: no certificate")?;
    let t = &search.sequence.tower;
    let b = el(t, "b");
    ensure(w.q == 2 && w.big_q == 2, || format!("t-nm1: q = {}, Q = {}", w.q, w.big_q))?;
    ensure(w.verification.image_of_zq == b, || format!("t-nm1: D(t^2) = {}", t.fmt_elem(&w.verification.image_of_zq)))?;
    ensure(pth_root_in_l(t, &b, 1).is_none(), || "t-nm1: b has a square root".into())?;
    ensure(w.verification.passed(w.big_q), || "t-nm1: verification record failed".into())?;

    let search = find_witness(&load("t-nm2")).map_err(|e| e.to_string())?;
    let w = search.certificate.ok_or("t-nm2: no certificate")?;
    let t = &search.sequence.tower;
    let uinv = t.inv(&el(t, "u")).unwrap();
    ensure((w.q, w.b1, w.big_q) == (2, 2, 4), || format!("t-nm2: q = {}, b1 = {}, Q = {}", w.q, w.b1, w.big_q))?;
    ensure(w.verification.image_of_zq == uinv, || format!("t-nm2: D(z2^2) = {}", t.fmt_elem(&w.verification.image_of_zq)))?;
    ensure(w.verification.passed(w.big_q), || "t-nm2: verification record failed".into())?;
    Ok("t-nm1: q=2 Q=2 D(t^2)=b; t-nm2: q=2 b1=2 Q=4 D(z2^2)=1/u".into())
}

fn spanning() -> Outcome {
    for name in ["t-split", "t-split2", "t-nm1", "t-tricky"] {
        let t = load(name);
        let span = modular_by_span(&t, DEFAULT_DIM_CEILING);
        let oracle = modular_by_disjointness(&t).modular;
        ensure(span.modular == Some(oracle), || format!("{name}: span {:?} vs oracle {oracle}", span.modular))?;
        if name == "t-nm1" {
            ensure(span.levels[0].status == SpanStatus::NotSurjective, || "t-nm1: level 1 spans".into())?;
        }
    }
    let t = load("t-nm2");
    let start = Instant::now();
    let span = modular_by_span(&t, DEFAULT_DIM_CEILING);
    let took = start.elapsed();
    ensure(took < Duration::from_secs(600), || format!("t-nm2: span took {took:?}"))?;
    let level1 = &span.levels[0].status;
    ensure(!matches!(level1, SpanStatus::Refused { .. }), || "t-nm2: level 1 refused".into())?;
    let detail = match span.modular {
        Some(v) => {
            ensure(!v, || "t-nm2: span says modular".into())?;
            "t-nm2 decided by span".to_string()
        }
        None => {
            ensure(matches!(span.levels[1].status, SpanStatus::Refused { .. }), || "t-nm2: unexpected refusal".into())?;
            let code = pitower(&["modular", &fixture_path("t-nm2"), "--method", "span"]).status.code();
            ensure(code == Some(4), || format!("t-nm2: exit code {code:?} for refused span"))?;
            let w = find_witness(&t).map_err(|e| e.to_string())?;
            ensure(w.certificate.is_some(), || "t-nm2: witness path did not decide".into())?;
            format!("t-nm2 level 1 {level1:?} in {took:.2?}, level 2 refused (exit 4), witness decides")
        }
    };
    Ok(format!("4 fixtures agree, t-nm1 fails at level 1; {detail}"))
}

fn prefix_operators(prefix: &Tower, i: usize, rng: &mut ChaCha8Rng) -> Vec<LinearOperator> {
    let mut ops = vec![random_operator(prefix, rng, 0.5), random_operator(prefix, rng, 0.15)];
    let mut combo = LinearOperator::zero(prefix);
    for _ in 0..2 {
        let d = if i == 0 {
            LinearOperator::identity(prefix)
        } else {
            let var = rng.gen_range(0..i);
            let m = rng.gen_range(0..prefix.generators()[var].q);
            monomial_divided_power(prefix, var, m)
        };
        combo = combo.add(prefix, &d.scale(prefix, &random_element(prefix, rng, 0.4)));
    }
    ops.push(combo);
    ops
}

fn order_preservation() -> Outcome {
    let corpus = labelled_corpus(&CorpusConfig::default()).map_err(|e| e.to_string())?;
    let (mut cases, mut brute_checked) = (0, 0);
    for (index, (label, spec)) in corpus.iter().enumerate() {
        let t = build_tower(spec).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(4000 + index as u64);
        let n = t.num_gens();
        let i = if n >= 2 { rng.gen_range(1..n) } else { 0 };
        let prefix = t.prefix(i);
        let fp = Filtration::complete(&prefix);
        let ft = Filtration::complete(&t);
        for (slot, d) in prefix_operators(&prefix, i, &mut rng).into_iter().enumerate() {
            let ext = normal_extension(&t, &d, i).map_err(|e| format!("{label}: {e}"))?;
            let (a, b) = (fp.order(&d), ft.order(&ext));
            ensure(a.is_some() && a == b, || format!("{label}: prefix {i} order {a:?}, extended {b:?}"))?;
            // dense operators have the largest orders, where the brute force is slowest
            if t.dim() <= 8 && slot > 0 {
                let brute = brute_order(&t, &ext, order_bound(&t)).map_err(|e| format!("{label}: {e}"))?;
                ensure(Some(brute) == b, || format!("{label}: brute order {brute} vs {b:?}"))?;
                brute_checked += 1;
            }
            cases += 1;
        }
    }
    Ok(format!("{} towers, {cases} operators, 100% preserved, {brute_checked} brute-checked", corpus.len()))
}

fn boundedness() -> Outcome {
    let mut report = Vec::new();
    for (fi, name) in FIXTURES.iter().enumerate() {
        let t = load(name);
        let f = Filtration::complete(&t);
        let bound = order_bound(&t);
        let p = t.characteristic() as usize;
        let e = pitower_core::modularity::exponent(&t);
        let pe = p.pow(e);
        let mut rng = ChaCha8Rng::seed_from_u64(500 + fi as u64);
        let mut within_pe = 0;
        let total = 50;
        for s in 0..total {
            let density = [0.05, 0.2, 0.6][s % 3];
            let d = random_operator(&t, &mut rng, density);
            let ord = f.order(&d).ok_or_else(|| format!("{name}: operator without finite order"))?;
            ensure(ord <= bound, || format!("{name}: order {ord} above {bound}"))?;
            if ord <= pe {
                within_pe += 1;
            }
        }
        report.push(format!("{name} {within_pe}/{total}"));
    }
    Ok(format!("all orders within sum(q_i - 1); order <= p^e: {}", report.join(", ")))
}

fn oracle_equivalence() -> Outcome {
    let t = build_tower(&parse_tower("p = 2\nparams = t\ngen x : x^4 = t\n").unwrap()).unwrap();
    let k = t.coeff_field();
    let f = Filtration::complete(&t);
    let bound = order_bound(&t);
    let n = t.dim();
    let check = |d: &LinearOperator| -> Result<(), String> {
        let brute = brute_order(&t, d, bound).map_err(|e| e.to_string())?;
        ensure(Some(brute) == f.order(d), || format!("brute {brute} vs filtration {:?}", f.order(d)))
    };
    let mut exhaustive = 0;
    for bits in 0u32..(1 << (n * n)) {
        let m: Vec<Vec<RatFunc>> = (0..n)
            .map(|r| (0..n).map(|c| if bits >> (r * n + c) & 1 == 1 { k.one() } else { k.zero() }).collect())
            .collect();
        check(&LinearOperator::from_k_matrix(&t, &m))?;
        exhaustive += 1;
    }
    let tt = k.param(0);
    let sample = [k.zero(), k.one(), tt.clone(), k.add(&tt, &k.one()), k.mul(&tt, &tt)];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..600 {
        let m: Vec<Vec<RatFunc>> =
            (0..n).map(|_| (0..n).map(|_| sample[rng.gen_range(0..sample.len())].clone()).collect()).collect();
        check(&LinearOperator::from_k_matrix(&t, &m))?;
    }
    let mut at8 = 0;
    for name in ["t-split", "t-nm1"] {
        let t = load(name);
        let f = Filtration::complete(&t);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for s in 0..30 {
            let d = random_operator(&t, &mut rng, [0.05, 0.15, 0.4][s % 3]);
            let brute = brute_order(&t, &d, order_bound(&t)).map_err(|e| e.to_string())?;
            ensure(Some(brute) == f.order(&d), || format!("{name}: brute {brute} vs {:?}", f.order(&d)))?;
            at8 += 1;
        }
    }
    Ok(format!("{exhaustive} exhaustive + 600 sampled operators at N=4, {at8} at N=8, zero mismatches"))
}

fn jacobson_bourbaki() -> Outcome {
    let mut cases = Vec::new();
    for name in FIXTURES {
        let t = load(name);
        let frob: Vec<_> = (0..t.num_gens()).map(|k| t.frobenius(&t.gen(k), 1)).collect();
        cases.push((format!("{name} K(L^p)"), t.clone(), Subfield::generated_by(&t, &frob)));
    }
    let t = load("t-split");
    cases.push(("t-split K".into(), t.clone(), Subfield::base(&t)));
    cases.push(("t-split L".into(), t.clone(), Subfield::whole(&t)));
    let e = Subfield::generated_by(&t, &[el(&t, "x^2"), el(&t, "y")]);
    ensure(e.dim() == 4, || format!("K(x^2, y) has dimension {}", e.dim()))?;
    cases.push(("t-split K(x^2,y)".into(), t.clone(), e));
    for (label, t, e) in &cases {
        let r = relative_endomorphisms(t, e).map_err(|err| format!("{label}: {err}"))?;
        let back = fixed_field(t, &r).map_err(|err| format!("{label}: {err}"))?;
        ensure(back.same_as(t, e), || format!("{label}: round trip gave dimension {}", back.dim()))?;
    }
    Ok(format!("{} round trips exact", cases.len()))
}

fn harness_soundness() -> Outcome {
    let mut towers: Vec<(String, TowerSpec)> = FIXTURES.iter().map(|n| (n.to_string(), fixture_spec(n))).collect();
    towers.extend(labelled_corpus(&CorpusConfig::default()).map_err(|e| e.to_string())?);
    let h = agreement_harness(&towers, DEFAULT_DIM_CEILING);
    ensure(h.hard_failures == 0, || {
        let bad: Vec<_> = h.rows.iter().filter(|r| r.hard_failure).map(|r| r.label.clone()).collect();
        format!("hard failures on {bad:?}")
    })?;
    let tricky = h.rows.iter().find(|r| r.label == "t-tricky").unwrap();
    ensure(!tricky.pickert_modular && tricky.witness == WitnessStatus::None && tricky.disjoint_modular, || {
        format!("t-tricky row {tricky:?}")
    })?;
    Ok(format!(
        "{} towers, 0 hard failures, {} span discrepancies, {} span refusals",
        h.rows.len(),
        h.span_discrepancies,
        h.span_refusals
    ))
}

fn lucas_table() -> Outcome {
    let mut checked = 0;
    for p in [2u32, 3, 5] {
        let mut row = vec![1u32];
        for n in 0..=64u64 {
            for k in 0..=64u64 {
                let pascal = row.get(k as usize).copied().unwrap_or(0);
                ensure(lucas(n, k, p) == pascal, || format!("C({n},{k}) mod {p}"))?;
                checked += 1;
            }
            let mut next = vec![1u32; row.len() + 1];
            for k in 1..row.len() {
                next[k] = (row[k - 1] + row[k]) % p;
            }
            row = next;
        }
    }
    Ok(format!("{checked} entries, zero mismatches"))
}

fn determinism() -> Outcome {
    for name in FIXTURES {
        let path = fixture_path(name);
        let args = ["modular", path.as_str(), "--json"];
        let (a, b) = (pitower(&args), pitower(&args));
        ensure(!a.stdout.is_empty() && a.stdout == b.stdout, || format!("{name}: modular output differs"))?;
    }
    let args = ["harness", "--seed", "1", "--count", "25", "--json"];
    let (a, b) = (pitower(&args), pitower(&args));
    ensure(a.status.code() == Some(0), || format!("harness exit {:?}", a.status.code()))?;
    ensure(a.stdout == b.stdout, || "harness output differs".into())?;
    Ok(format!("5 modular reports and a {}-byte harness report byte-identical", a.stdout.len()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("fixture verdicts", fixture_verdicts),
        ("witness reproduction", witness_reproduction),
        ("spanning criterion", spanning),
        ("order preservation under normal extension", order_preservation),
        ("End = Diff boundedness", boundedness),
        ("brute order equivalence", oracle_equivalence),
        ("Jacobson-Bourbaki round trip", jacobson_bourbaki),
        ("harness soundness", harness_soundness),
        ("Lucas table", lucas_table),
        ("determinism", determinism),
    ];
    let results: Vec<(Outcome, Duration)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|(_, f)| {
                s.spawn(move || {
                    let start = Instant::now();
                    let r = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
                    (r, start.elapsed())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = 0;
    for (i, ((name, _), (r, took))) in criteria.iter().zip(&results).enumerate() {
        match r {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg} [{took:.1?}]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {msg} [{took:.1?}]", i + 1);
            }
        }
    }
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
