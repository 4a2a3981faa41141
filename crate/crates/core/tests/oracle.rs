mod common;

use std::time::Instant;

use common::{el, fixture_spec, load, FIXTURES};
use pitower_core::linops::{monomial_divided_power, mult_operator, order_bound, Filtration};
use pitower_core::oracle::{
    agreement_harness, brute_order, corpus, random_operator, random_tower, CorpusConfig, OracleError, Template,
    WitnessStatus,
};
use pitower_core::semilinear::DEFAULT_DIM_CEILING;
use pitower_core::tower::build_tower;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn brute_order_examples() {
    let t = load("t-split");
    let bound = order_bound(&t);
    assert_eq!(brute_order(&t, &mult_operator(&t, &el(&t, "x*y + s")), bound), Ok(0));
    let d = monomial_divided_power(&t, 0, 2);
    assert_eq!(brute_order(&t, &d, bound), Ok(2));
    assert_eq!(Filtration::complete(&t).order(&d), Some(2));
    assert_eq!(brute_order(&t, &monomial_divided_power(&t, 0, 3), 1), Err(OracleError::BoundExceeded { bound: 1 }));
}

#[test]
fn brute_order_matches_filtration_on_random_operators() {
    let t = load("t-nm1");
    let f = Filtration::complete(&t);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for density in [0.1, 0.3] {
        for _ in 0..6 {
            let d = random_operator(&t, &mut rng, density);
            assert_eq!(brute_order(&t, &d, order_bound(&t)).ok(), f.order(&d));
        }
    }
}

#[test]
fn random_towers_are_reproducible() {
    let cfg = CorpusConfig::default();
    let a = random_tower(&cfg, 0).unwrap();
    let b = random_tower(&cfg, 0).unwrap();
    assert_eq!(a.pretty(), b.pretty());
    let other = CorpusConfig { seed: 2, ..cfg.clone() };
    let c: Vec<_> = (0..6).map(|i| random_tower(&other, i).unwrap()).collect();
    let d: Vec<_> = (0..6).map(|i| random_tower(&cfg, i).unwrap()).collect();
    assert_ne!(c, d);
}

#[test]
fn corpus_builds_and_mixes_templates() {
    let cfg = CorpusConfig::default();
    let specs = corpus(&cfg).unwrap();
    assert_eq!(specs.len(), 25);
    let mut non_split = 0;
    for (i, s) in specs.iter().enumerate() {
        let t = build_tower(s).unwrap();
        assert!(t.dim() <= 16);
        if Template::for_index(i) != Template::Split {
            non_split += 1;
        }
    }
    assert!(non_split >= 5);
}

#[test]
fn invalid_configs_are_rejected() {
    let cfg = CorpusConfig { max_gens: 4, ..CorpusConfig::default() };
    assert!(matches!(random_tower(&cfg, 0), Err(OracleError::InvalidConfig(_))));
    let cfg = CorpusConfig { max_dim: 32, ..CorpusConfig::default() };
    assert!(matches!(random_tower(&cfg, 0), Err(OracleError::InvalidConfig(_))));
}

#[test]
fn harness_on_fixtures() {
    let towers: Vec<_> = FIXTURES.iter().map(|n| (n.to_string(), fixture_spec(n))).collect();
    let report = agreement_harness(&towers, DEFAULT_DIM_CEILING);
    assert_eq!(report.hard_failures, 0, "{report:#?}");
    assert_eq!(report.span_discrepancies, 0);
    let tricky = report.rows.iter().find(|r| r.label == "t-tricky").unwrap();
    assert!(!tricky.pickert_modular);
    assert!(tricky.disjoint_modular);
    assert_eq!(tricky.witness, WitnessStatus::None);
    assert_eq!(tricky.span_modular, Some(true));
    let nm2 = report.rows.iter().find(|r| r.label == "t-nm2").unwrap();
    assert_eq!(nm2.witness, WitnessStatus::Found { level: 2 });
    assert_eq!(nm2.span_refused_levels, vec![2]);
}

#[test]
fn harness_on_seeded_corpus() {
    let start = Instant::now();
    let towers = pitower_core::oracle::labelled_corpus(&CorpusConfig::default()).unwrap();
    let report = agreement_harness(&towers, DEFAULT_DIM_CEILING);
    eprintln!("corpus harness: {:?}", start.elapsed());
    for r in &report.rows {
        eprintln!("{} N={} exps={:?} disjoint={} span={:?} witness={:?} {:?}", r.label, r.dim, r.exponents, r.disjoint_modular, r.span_modular, r.witness, r.flags);
    }
    assert_eq!(report.hard_failures, 0, "{report:#?}");
    assert_eq!(report, agreement_harness(&towers, DEFAULT_DIM_CEILING));
}
