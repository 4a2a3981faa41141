#![allow(dead_code)]

use pitower_core::spec::{parse_expr, parse_tower, TowerSpec};
use pitower_core::tower::{build_tower, eval_expr, Tower, TowerElement};

pub const FIXTURES: [&str; 5] = ["t-split", "t-split2", "t-nm1", "t-nm2", "t-tricky"];

pub fn fixture_spec(name: &str) -> TowerSpec {
    let path = format!("{}/../../fixtures/{name}.tw", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    parse_tower(&text).unwrap()
}

pub fn load(name: &str) -> Tower {
    build_tower(&fixture_spec(name)).unwrap()
}

pub fn tower_from(text: &str) -> Tower {
    build_tower(&parse_tower(text).unwrap()).unwrap()
}

/// Element of `t` written over its parameters and generators.
pub fn el(t: &Tower, text: &str) -> TowerElement {
    let params = t.coeff_field().param_names().to_vec();
    let gens: Vec<String> = t.generators().iter().map(|g| g.name.clone()).collect();
    let e = parse_expr(text, &params, &gens).unwrap();
    eval_expr(t, &e, "<test>").unwrap()
}
