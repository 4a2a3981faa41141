use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", &format!("{name}.tw")].iter().collect();
    p.to_string_lossy().into_owned()
}

fn pitower(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pitower")).args(args).env_remove("PITOWER_DIM_CEILING").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn temp_file(name: &str, text: &str) -> String {
    let path = std::env::temp_dir().join(format!("pitower-cli-{}-{name}.tw", std::process::id()));
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn check_accepts_fixtures() {
    for name in ["t-split", "t-split2", "t-nm1", "t-nm2", "t-tricky"] {
        let o = pitower(&["check", &fixture(name)]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
        assert!(stdout(&o).starts_with("ok:"));
    }
}

#[test]
fn parse_errors_exit_1_with_position() {
    let f = temp_file("nonpow", "p = 2\nparams = s\ngen x : x^6 = s\n");
    let o = pitower(&["check", &f]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(":3:11: error[E201]"), "{}", stderr(&o));

    let f = temp_file("divisor", "p = 2\nparams = s\ngen x : x^2 = s\ngen y : y^2 = 1/x\n");
    let o = pitower(&["modular", &f]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error[E203]"));
}

#[test]
fn invalid_towers_exit_2() {
    let f = temp_file("nonmin", "p = 2\nparams = s\ngen x : x^4 = s^2\n");
    let o = pitower(&["check", &f]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not minimal"));
    let f = temp_file("redundant", "p = 2\nparams = s, t\ngen x : x^2 = s\ngen y : y^2 = x*t\n");
    assert_eq!(pitower(&["pickert", &f]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(pitower(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(pitower(&["modular"]).status.code(), Some(64));
    assert_eq!(pitower(&["modular", &fixture("t-nm1"), "--method", "guess"]).status.code(), Some(64));
    assert_eq!(pitower(&["check", "/nonexistent/tower.tw"]).status.code(), Some(64));
    let o = Command::new(env!("CARGO_BIN_EXE_pitower"))
        .args(["modular", &fixture("t-nm1")])
        .env("PITOWER_DIM_CEILING", "lots")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(64));
    assert_eq!(pitower(&["--help"]).status.code(), Some(0));
}

#[test]
fn pickert_text() {
    let o = pitower(&["pickert", &fixture("t-nm2")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "exponents: 3 1"), "{out}");
    assert!(out.contains("z2^2 = v/u + 1/u*z1^4"));
    assert!(out.contains("pickert: inconclusive at z2"));
}

#[test]
fn modular_json_for_nm1() {
    let o = pitower(&["modular", &fixture("t-nm1"), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.ends_with("}\n"));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema"], "pitower/1");
    assert_eq!(v["verdict"], "non_modular");
    assert_eq!(v["span"]["1"], false);
    assert_eq!(v["witness"]["Q"], 2);
    assert_eq!(v["witness"]["q"], 2);
    assert_eq!(v["witness"]["image_of_zq"], "b");
    assert_eq!(v["witness"]["verified"], true);
    assert_eq!(v["disjointness"]["levels"]["1"]["disjoint"], false);
}

#[test]
fn modular_text_for_tricky() {
    let o = pitower(&["modular", &fixture("t-tricky")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("verdict: modular"));
    assert!(out.contains("flags: pickert_inconclusive"));
    assert!(out.contains("witness: none"));
}

#[test]
fn refusals_exit_4() {
    let o = pitower(&["modular", &fixture("t-nm2"), "--method", "span", "--json"]);
    assert_eq!(o.status.code(), Some(4));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["span"]["2"], "refused");
    assert_eq!(v["verdict"], "non_modular");

    let o = pitower(&["modular", &fixture("t-nm2"), "--method", "witness"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Q = 4"));

    let o = pitower(&["closure", &fixture("t-nm2")]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("16384"));
}

#[test]
fn closure_json() {
    let o = pitower(&["closure", &fixture("t-split"), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["closure"]["is_base_field"], true);
    assert_eq!(v["closure"]["index"], 8);

    let o = pitower(&["closure", &fixture("t-nm1"), "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["closure"]["is_base_field"], false);
    assert_eq!(v["closure"]["modular_over_closure"]["modular"], true);
}

#[test]
fn ops_dimensions() {
    let o = pitower(&["ops", &fixture("t-split"), "--max-order", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "Diff^0: dim_L 1, dim_K 8\nDiff^1: dim_L 3, dim_K 24\nDiff^2: dim_L 5, dim_K 40\n");
}

#[test]
fn harness_json_is_deterministic() {
    let args = ["harness", "--seed", "5", "--count", "4", "--json"];
    let a = pitower(&args);
    let b = pitower(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    assert_eq!(v["hard_failures"], 0);
}
