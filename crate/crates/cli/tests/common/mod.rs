//! Shared golden-file harness for the `cklab` binary.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

pub const REFERENCE_MATRICES: [&str; 3] = ["full2", "golden_mean", "three"];

/// Subcommand arguments run against every reference matrix.
pub const MATRIX_COMMANDS: [(&str, &[&str]); 8] = [
    ("validate", &["validate"]),
    ("condition_i", &["condition-i"]),
    ("bratteli", &["bratteli", "--levels", "5"]),
    (
        "states",
        &["states", "--prefix", "1,1,1,1,1,1", "--level", "3"],
    ),
    ("relations", &["relations", "--trunc", "5"]),
    ("crossed", &["crossed", "--trunc", "6"]),
    (
        "uniqueness",
        &[
            "uniqueness",
            "--trunc",
            "6",
            "--samples",
            "20",
            "--seed",
            "7",
        ],
    ),
    ("gap_witness", &["gap-witness"]),
];

pub struct Case {
    pub name: String,
    pub args: Vec<String>,
}

fn case(name: String, args: &[&str], input: &str) -> Case {
    let mut v: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    v.insert(1, input.to_string());
    Case { name, args: v }
}

/// Every golden case: all subcommands on the reference matrices, plus the
/// cases that need inputs of a different shape.
pub fn all_cases() -> Vec<Case> {
    let mut out = Vec::new();
    for m in REFERENCE_MATRICES {
        for (cmd, args) in MATRIX_COMMANDS {
            out.push(case(format!("{m}__{cmd}"), args, &format!("{m}.json")));
        }
    }
    for m in ["identity2", "swap"] {
        out.push(case(
            format!("{m}__condition_i"),
            &["condition-i"],
            &format!("{m}.json"),
        ));
        out.push(case(
            format!("{m}__gap_witness"),
            &["gap-witness"],
            &format!("{m}.json"),
        ));
        out.push(case(
            format!("{m}__uniqueness"),
            &["uniqueness", "--trunc", "6", "--seed", "7"],
            &format!("{m}.json"),
        ));
    }
    for b in ["bimodule_pair", "bimodule_chain", "bimodule_cycle"] {
        out.push(case(
            b.to_string(),
            &["bimodule", "--trials", "20", "--seed", "3"],
            &format!("{b}.json"),
        ));
    }
    out.push(case(
        "bad_entry__validate".into(),
        &["validate"],
        "bad_entry.json",
    ));
    out.push(case(
        "malformed__validate".into(),
        &["validate"],
        "malformed.json",
    ));
    out.push(case(
        "missing__validate".into(),
        &["validate"],
        "missing.json",
    ));
    out.push(case(
        "full2__relations_short".into(),
        &["relations", "--trunc", "2"],
        "full2.json",
    ));
    out
}

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub struct Run {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
}

pub fn run(args: &[String]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_cklab"))
        .args(args)
        .arg("--quiet")
        .current_dir(fixtures())
        .env_remove("CKLAB_REPORT_DIR")
        .output()
        .expect("spawn cklab");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: out.stdout,
        stderr: out.stderr,
    }
}

/// Golden content: stdout for successful runs, otherwise the exit code
/// followed by stderr, stored with a `.err` suffix.
pub fn golden_bytes(run: &Run) -> (&'static str, Vec<u8>) {
    if run.code == 0 || run.code == 2 {
        ("json", run.stdout.clone())
    } else {
        let mut b = format!("exit {}\n", run.code).into_bytes();
        b.extend_from_slice(&run.stderr);
        ("err", b)
    }
}

/// Compares one case against its golden file; `UPDATE_GOLDEN=1` rewrites it.
pub fn check_case(c: &Case) -> Result<(), String> {
    let r = run(&c.args);
    let (ext, bytes) = golden_bytes(&r);
    let path = golden_dir().join(format!("{}.{ext}", c.name));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden_dir()).map_err(|e| e.to_string())?;
        std::fs::write(&path, &bytes).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let expected = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected != bytes {
        return Err(format!("{} differs from {}", c.name, path.display()));
    }
    let rerun = run(&c.args);
    if golden_bytes(&rerun).1 != bytes {
        return Err(format!("{} is not deterministic across runs", c.name));
    }
    Ok(())
}
