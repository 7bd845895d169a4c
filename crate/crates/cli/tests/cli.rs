use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(rel: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    root.join(rel).to_string_lossy().into_owned()
}

fn hint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hint")).args(args).env_remove("HINT_BUDGET").output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad json ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn chain_args<'a>(cmd: &'a str, m: &'a str, n: &'a str) -> Vec<String> {
    vec![
        cmd.into(),
        "--poset".into(),
        fixture("chain/poset.json"),
        "--height".into(),
        fixture("chain/height.json"),
        "--m".into(),
        fixture(m),
        "--n".into(),
        fixture(n),
    ]
}

fn run(args: &[String]) -> Output {
    hint(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

#[test]
fn cyclic_poset_fails_validation_with_the_cycle() {
    let out = hint(&["validate", "--poset", &fixture("cyclic.json")]);
    assert_eq!(out.status.code(), Some(1));
    let j = json_of(&out);
    assert_eq!(j["valid"], false);
    assert!(j["error"].as_str().unwrap().contains("cycle"));
}

#[test]
fn malformed_json_reports_its_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\"elements\": [\"a\",\n  ]").unwrap();
    let out = hint(&["validate", "--poset", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("line 2"));
}

#[test]
fn repro_chain_gives_zero_zero_two() {
    let out = hint(&["repro", "chain", "--C", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let j = json_of(&out);
    assert_eq!(j["distances"], serde_json::json!(["0", "0", "2"]));
    assert_eq!(j["triangle"]["violated"], true);
    assert_eq!(j["d_M_X"]["attained"], false);
}

#[test]
fn repro_grid_and_bipath_pass() {
    for args in [vec!["repro", "grid"], vec!["repro", "bipath", "--G", "8"]] {
        let out = hint(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert_eq!(json_of(&out)["ok"], true);
    }
}

#[test]
fn distance_matches_repro_on_fixture_files() {
    let out = run(&chain_args("distance", "chain/M.json", "chain/N.json"));
    assert_eq!(out.status.code(), Some(0));
    let j = json_of(&out);
    assert_eq!(j["distance"], "2");
    assert_eq!(j["strata"][2]["interval"], serde_json::json!(["1", "2"]));
    assert_eq!(j["strata"][2]["verdict"], "no");
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(!text.contains('.'), "reports carry no floats");
}

#[test]
fn tiny_budget_exits_with_two() {
    let mut args = chain_args("interleave", "chain/M.json", "chain/X.json");
    args.extend(["--r".into(), "1".into(), "--budget".into(), "1".into()]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_of(&out)["verdict"], "unknown");
}

#[test]
fn budget_comes_from_the_environment() {
    let mut args = chain_args("interleave", "chain/M.json", "chain/X.json");
    args.extend(["--r".into(), "1".into()]);
    let out = Command::new(env!("CARGO_BIN_EXE_hint")).args(&args).env("HINT_BUDGET", "1").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn emitted_modules_reparse() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("l1.json");
    let out = hint(&[
        "functor",
        "--poset",
        &fixture("grid/poset.json"),
        "--height",
        &fixture("grid/height.json"),
        "--module",
        &fixture("grid/M.json"),
        "--kind",
        "L",
        "--r",
        "1",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let back = hint(&["validate", "--poset", &fixture("grid/poset.json"), "--module", path.to_str().unwrap()]);
    assert_eq!(back.status.code(), Some(0));
    let dims = &json_of(&back)["modules"][0];
    assert_eq!(dims.as_array().unwrap().iter().map(|d| d.as_u64().unwrap()).sum::<u64>(), 7);
}

#[test]
fn fixed_seed_is_byte_identical() {
    let args = ["oracle-grid", "--trials", "3", "--seed", "9"];
    let a = hint(&args);
    let b = hint(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json_of(&a)["agree"], true);
}

#[test]
fn diamond_cip_witness() {
    let out = hint(&["cip", "--poset", &fixture("diamond/poset.json"), "--height", &fixture("diamond/height.json")]);
    let j = json_of(&out);
    assert_eq!(j["verdict"], "no");
    assert_eq!(j["witness"]["set"], serde_json::json!(["b", "c"]));
}

#[test]
fn ivc_reports_a_witness_below_c_rho() {
    let base = ["--poset".to_string(), fixture("chain/poset.json"), "--height".into(), fixture("chain/height.json")];
    let mut args = vec!["ivc".to_string()];
    args.extend(base.iter().cloned());
    args.extend(["--c".into(), "0".into()]);
    let j = json_of(&run(&args));
    assert_eq!(j["holds"], false);
    let mut args = vec!["c-rho".to_string()];
    args.extend(base.iter().cloned());
    assert_eq!(json_of(&run(&args))["c"], "2");
}

#[test]
fn galois_sandwich_on_the_chain() {
    let out = hint(&[
        "galois",
        "--poset",
        &fixture("galois/poset.json"),
        "--m",
        &fixture("galois/M.json"),
        "--n",
        &fixture("galois/N.json"),
        "--big",
        &fixture("chain/poset.json"),
        "--big-height",
        &fixture("chain/height.json"),
        "--iota",
        &fixture("galois/iota.json"),
        "--pi",
        &fixture("galois/pi.json"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let j = json_of(&out);
    assert_eq!((j["distance"].as_str(), j["pulled_back_distance"].as_str()), (Some("0"), Some("2")));
    assert_eq!(j["distortion"], "3");
    assert_eq!(j["holds"], true);
}

#[test]
fn pullback_along_a_subchain_does_not_increase_distance() {
    let mut args = chain_args("pullback", "chain/M.json", "chain/N.json");
    args.extend(["--source".into(), fixture("chain/sub.json"), "--map".into(), fixture("chain/sub_map.json")]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
    let j = json_of(&out);
    assert_eq!(j["distance"], "2");
    assert_eq!(j["pullback_distance"], "0");
}

#[test]
fn a_wrong_certificate_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let zero = dir.path().join("zero.json");
    std::fs::write(&zero, "{\"components\": {}}").unwrap();
    let mut args = chain_args("interleave", "chain/M.json", "chain/N.json");
    let z = zero.to_str().unwrap().to_string();
    args.extend(["--r".into(), "1".into(), "--p".into(), z.clone(), "--q".into(), z]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["valid"], false);
}
