mod common;

use common::{all_cases, check_case};

#[test]
fn reports_match_golden_files() {
    let failures: Vec<String> = all_cases()
        .iter()
        .filter_map(|c| check_case(c).err())
        .collect();
    assert!(
        failures.is_empty(),
        "golden mismatches:\n{}",
        failures.join("\n")
    );
}

#[test]
fn every_reference_report_parses_and_carries_a_manifest() {
    for c in all_cases() {
        let r = common::run(&c.args);
        if r.code != 0 && r.code != 2 {
            continue;
        }
        let v: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
        let m = &v["manifest"];
        assert!(
            m["input_digest"].as_str().unwrap().starts_with("sha256:"),
            "{}",
            c.name
        );
        assert!(m["wall_time_ms"].is_null(), "{}", c.name);
        if m["command"] != "validate" {
            assert!(!m["anchors"].as_array().unwrap().is_empty(), "{}", c.name);
        }
        assert!(v["contracts_met"].is_boolean());
    }
}

#[test]
fn report_keys_match_documented_schemas() {
    let schemas = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas");
    let keys = |v: &serde_json::Value| -> Vec<String> {
        let mut k: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
        k.sort();
        k
    };
    for c in all_cases() {
        let r = common::run(&c.args);
        if r.code != 0 && r.code != 2 {
            continue;
        }
        let v: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
        let command = v["manifest"]["command"].as_str().unwrap().replace('-', "_");
        let text =
            std::fs::read_to_string(schemas.join(format!("{command}_result.schema.json"))).unwrap();
        let schema: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(
            keys(&v["result"]),
            keys(&schema["properties"]),
            "{}",
            c.name
        );
        let envelope: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(schemas.join("report.schema.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(
            keys(&v["manifest"]),
            keys(&envelope["properties"]["manifest"]["properties"])
        );
    }
}
