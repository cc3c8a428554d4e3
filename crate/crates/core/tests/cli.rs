//! Exit codes and report contents of the `papm` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn spec(&self, name: &str, body: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        std::fs::write(&path, body).unwrap();
        path
    }

    fn conformal(&self, u: &str) -> PathBuf {
        self.spec(
            &format!("{}.json", u.replace(|c: char| !c.is_alphanumeric(), "_")),
            &format!(r#"{{"n": 2, "kind": "conformal_product", "u": "{u}"}}"#),
        )
    }
}

fn papm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_papm"))
        .args(args)
        .env_remove("PAPM_SEED")
        .output()
        .unwrap()
}

fn run(args: &[&str], spec: &Path) -> (i32, Value) {
    let mut full = vec![args[0], spec.to_str().unwrap()];
    full.extend_from_slice(&args[1..]);
    let out = papm(&full);
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), report)
}

#[test]
fn validate_exit_codes() {
    let ws = Workspace::new();
    let (code, report) = run(&["validate"], &ws.conformal("x1*x3"));
    assert_eq!(code, 0);
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["records"].as_array().unwrap().len(), 5);
    assert!(report["records"][0]["w1"]["tolerance"].is_number());

    let broken = ws.spec(
        "broken.json",
        r#"{"n": 1, "kind": "explicit", "g": [["1","0"],["0","1"]], "P": [[1,0],[0,1]]}"#,
    );
    assert_eq!(run(&["validate"], &broken).0, 1);

    let malformed = ws.spec("malformed.json", r#"{"n": 2, "kind": "#);
    assert_eq!(run(&["validate"], &malformed).0, 2);
    let missing = ws.dir.path().join("nope.json");
    assert_eq!(run(&["validate"], &missing).0, 2);
}

#[test]
fn classify_on_catalog_fixtures() {
    let ws = Workspace::new();
    let mixed = ws.conformal("x1*x3");
    let closed = ws.conformal("x1 + x3^2");

    let (code, r) = run(&["classify", "--named", "D"], &mixed);
    assert_eq!(code, 0, "{}", r["summary"]);
    assert_eq!(r["verdict"]["clause"], "i");
    assert_eq!(r["verdict"]["p_tensor_expected"], "yes");
    assert_eq!(r["numeric_p_tensor"], true);

    let (code, r) = run(&["classify", "--named", "canonical"], &mixed);
    assert_eq!(code, 0, "{}", r["summary"]);
    assert_eq!(r["verdict"]["clause"], "iii");
    assert_eq!(r["verdict"]["p_tensor_expected"], "no");
    assert_eq!(r["numeric_p_tensor"], false);

    let (code, r) = run(&["classify", "--named", "canonical"], &closed);
    assert_eq!(code, 0, "{}", r["summary"]);
    assert_eq!(r["verdict"]["p_tensor_expected"], "yes");

    let (code, _) = run(&["classify", "--lambda", "0.3", "--mu", "-0.2"], &closed);
    assert_eq!(code, 0);
    assert_eq!(run(&["classify", "--named", "foo"], &mixed).0, 2);
    assert_eq!(run(&["classify"], &mixed).0, 2);
}

#[test]
fn verify_identities() {
    let ws = Workspace::new();
    let mixed = ws.conformal("x1*x3");
    for (id, extra) in [
        ("eq21", vec!["--named", "D"]),
        ("eq19", vec!["--named", "canonical"]),
        ("eq12", vec!["--lambda", "0.7", "--mu", "-0.4"]),
        ("cor32", vec![]),
        ("eq26p", vec![]),
        ("naturality", vec!["--named", "Dtilde"]),
        ("decomposition", vec![]),
    ] {
        let mut args = vec!["verify", "--identity", id];
        args.extend(extra);
        let (code, r) = run(&args, &mixed);
        assert_eq!(code, 0, "{id}: {}", r["summary"]);
        for rec in r["records"].as_array().unwrap() {
            for check in rec["checks"].as_array().unwrap() {
                assert!(check["residual"].is_number());
            }
        }
    }
    let coarse = ws.spec(
        "coarse.json",
        r#"{"n": 2, "kind": "conformal_product", "u": "sin(2*x1)*x3", "fd_step": 0.01}"#,
    );
    let (code, r) = run(&["verify", "--identity", "eq21"], &coarse);
    assert_eq!(code, 1);
    assert!(r["records"][0]["checks"][0]["residual"].as_f64().unwrap() > 1e-4);
    assert_eq!(run(&["verify", "--identity", "eq99"], &mixed).0, 2);
}

#[test]
fn sweep_grids() {
    let ws = Workspace::new();
    let closed = ws.conformal("x1 + x3^2");
    let summary = ws.dir.path().join("summary.json");
    let out = papm(&[
        "sweep",
        closed.to_str().unwrap(),
        "--lambda-range",
        "-1:1",
        "--mu-range",
        "-1:1",
        "--steps",
        "9",
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("lambda,mu,delta,case,p_tensor_residual,expected")
    );
    assert_eq!(lines.count(), 81);
    let s: Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert!(!s["on_conic"].as_array().unwrap().is_empty());
    assert_eq!(s["summary"]["passed"], true);

    let mixed = ws.conformal("x1*x3");
    let out = papm(&[
        "sweep",
        mixed.to_str().unwrap(),
        "--lambda-range",
        "-1:1",
        "--mu-range",
        "-1:1",
        "--steps",
        "9",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let yes: Vec<_> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .skip(1)
        .filter(|l| l.ends_with(",yes"))
        .map(str::to_string)
        .collect();
    assert_eq!(yes.len(), 1);
    assert!(yes[0].starts_with("0.0,0.0,"));

    let single = papm(&[
        "sweep",
        mixed.to_str().unwrap(),
        "--lambda-range",
        "0.2:0.9",
        "--mu-range",
        "0.1:0.4",
        "--steps",
        "1",
    ]);
    assert_eq!(single.status.code(), Some(0));
    assert_eq!(String::from_utf8(single.stdout).unwrap().lines().count(), 2);

    for bad in [["1:-1", "3"], ["-1:1", "0"]] {
        let out = papm(&[
            "sweep",
            mixed.to_str().unwrap(),
            "--lambda-range",
            bad[0],
            "--mu-range",
            "-1:1",
            "--steps",
            bad[1],
        ]);
        assert_eq!(out.status.code(), Some(2), "{bad:?}");
    }
}

#[test]
fn seed_controls_default_points() {
    let ws = Workspace::new();
    let spec = ws.conformal("x1*x3");
    let with_seed = |seed: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_papm"))
            .args(["validate", spec.to_str().unwrap()])
            .env("PAPM_SEED", seed)
            .output()
            .unwrap();
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        (v["seed"].clone(), v["points"].clone())
    };
    let (a, b, c) = (with_seed("7"), with_seed("7"), with_seed("8"));
    assert_eq!(a, b);
    assert_eq!(a.0, 7);
    assert_ne!(a.1, c.1);
    let bad = Command::new(env!("CARGO_BIN_EXE_papm"))
        .args(["validate", spec.to_str().unwrap()])
        .env("PAPM_SEED", "seven")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
