use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_parendo"))
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> (i32, Value, String) {
    let Output { status, stdout, stderr } = bin().args(args).output().expect("binary runs");
    let v = serde_json::from_slice(&stdout).unwrap_or(Value::Null);
    (status.code().unwrap(), v, String::from_utf8_lossy(&stderr).into_owned())
}

fn classify(name: &str) -> (i32, Value) {
    let (code, v, _) = run(&["classify", data(name).to_str().unwrap()]);
    (code, v)
}

#[test]
fn flat_germ_is_out_of_scope() {
    let (code, v) = classify("flat.json");
    assert_eq!(code, 3);
    assert!(v["message"].as_str().unwrap().starts_with("flat/decomposable"));
}

#[test]
fn bundled_type_one_example() {
    let (code, v) = classify("type1_d4.json");
    assert!(code == 0 || code == 2, "{code}");
    assert_eq!(v["label"], "(1)");
    assert_eq!(v["holonomy"]["dim"], 6);
}

#[test]
fn bundled_paraquaternionic_example_matches_golden_report() {
    let (code, v) = classify("type3p_d4.json");
    assert_eq!(code, 0);
    assert_eq!(v["label"], "(3′)");
    let flat = v["verification"]["checks"].as_array().unwrap().iter().find(|c| c["name"] == "ricci_flat").unwrap();
    assert_eq!(flat["passed"], true);
    let golden: Value = serde_json::from_str(&std::fs::read_to_string(data("type3p_d4.report.json")).unwrap()).unwrap();
    assert_eq!(v, golden);
}

#[test]
fn classify_is_byte_deterministic() {
    let a = bin().args(["classify", data("type2_22.json").to_str().unwrap(), "--seed", "5"]).output().unwrap();
    let b = bin().args(["classify", data("type2_22.json").to_str().unwrap(), "--seed", "5"]).output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 5);
    assert_eq!(v["jet_order"], 4);
    assert!(v["holonomy"]["stabilized_at"].is_number());
}

#[test]
fn malformed_input_names_the_json_path() {
    let dir = std::env::temp_dir().join(format!("parendo-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"d": 2, "signature": [2, 0], "kind": "real", "g": [[1, 2]]}"#).unwrap();
    let (code, _, err) = run(&["classify", bad.to_str().unwrap()]);
    assert_eq!(code, 4);
    assert!(err.contains("$.g[0][0]"), "{err}");
    let singular = dir.join("singular.json");
    let zero = r#"{"n": 2, "K": 2, "terms": []}"#;
    std::fs::write(
        &singular,
        format!(r#"{{"d": 2, "signature": [2, 0], "kind": "real", "g": [[{zero}, {zero}], [{zero}, {zero}]]}}"#),
    )
    .unwrap();
    let (code, _, err) = run(&["classify", singular.to_str().unwrap()]);
    assert_eq!(code, 4);
    assert!(err.contains("invalid germ"), "{err}");
}

#[test]
fn generate_then_classify_roundtrip() {
    let dir = std::env::temp_dir().join(format!("parendo-gen-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("g.json");
    let (code, _, err) = run(&["generate", "--label", "2", "--signature", "2,2", "--seed", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let g: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(g["d"], 4);
    assert_eq!(g["expected_label"], "(2)");
    let (_, v, _) = run(&["classify", out.to_str().unwrap()]);
    assert_eq!(v["label"], "(2)");
}

#[test]
fn generate_rejects_disallowed_signature() {
    let (code, _, err) = run(&["generate", "--label", "2C", "--signature", "6,2"]);
    assert_eq!(code, 4);
    assert!(err.contains("(2p,2p)"), "{err}");
}

#[test]
fn cartan_command() {
    let (code, v, _) = run(&["cartan", "--delta", "1", "--epsilon", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["characters"], serde_json::json!([0, 1, 2, 0]));
    assert_eq!(v["dim_v"], 8);
    let (code, _, err) = run(&["cartan", "--delta", "9"]);
    assert_eq!(code, 4, "{err}");
}

#[test]
fn table_commands() {
    for which in ["1", "2", "3"] {
        let (code, v, err) = run(&["table", which]);
        assert_eq!(code, 0, "table {which}: {err}");
        assert!(!v["checks"].as_array().unwrap().is_empty());
    }
    let (code, _, _) = run(&["table", "4"]);
    assert_eq!(code, 4);
}

#[test]
fn verify_command_emits_checks() {
    let (code, v, _) = run(&["verify", data("type3p_d4.json").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(v["verification"]["checks"].as_array().unwrap().len() >= 10);
}
