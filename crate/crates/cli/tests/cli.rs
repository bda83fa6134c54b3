use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn supercon(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_supercon"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn exact_plr_prints_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let o = supercon(dir.path(), &["exact-plr", "--n", "6", "--ell", "2", "--r", "3", "--d", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "3/5");
    let m = read_json(&dir.path().join("exact-plr.manifest.json"));
    assert_eq!(m["config"]["command"]["n"], 6);
    assert_eq!(m["pass"], true);
}

#[test]
fn certify_pair_pass_and_fail() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["certify-pair", "--grid", "100"];
    let o = supercon(dir.path(), &args);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let cert = read_json(&dir.path().join("certify-pair.json"));
    for key in ["lemma", "params", "grid", "margin", "min_slack", "argmin_cell", "corners_evaluated", "pass"] {
        assert!(cert.get(key).is_some(), "{key}");
    }
    let o = supercon(dir.path(), &["certify-pair", "--grid", "100", "--margin", "0.01"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn certify_expansion_writes_cells() {
    let dir = tempfile::tempdir().unwrap();
    let o = supercon(dir.path(), &["certify-expansion", "--grid", "20", "--cells-csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let csv = std::fs::read_to_string(dir.path().join("certify-expansion.cells.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4 * 20 * 20);
}

#[test]
fn build_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let b = ["build-sc", "--n", "80", "--base", "20", "--d", "5", "--delta", "0.325", "--seed", "7"];
    let o = supercon(dir.path(), &b);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let m = read_json(&dir.path().join("build-sc.manifest.json"));
    let added: Vec<u64> = m["details"]["levels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l["edges_added"].as_u64().unwrap())
        .collect();
    assert_eq!(added, vec![1012, 506, 400]);
    let o = supercon(dir.path(), &["verify-sc", "--mode", "sampled", "--trials", "500"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    // exhaustive on N = 80 is far beyond any budget
    let o = supercon(dir.path(), &["verify-sc", "--mode", "exhaustive", "--budget", "1000"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn outputs_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["build-sc", "--n", "40", "--base", "20", "--seed", "3", "--accept", "--dot"];
    for d in [&a, &b] {
        assert_eq!(supercon(d.path(), &args).status.code(), Some(0));
    }
    for f in ["gamma.json", "gamma.dot"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    let ma = read_json(&a.path().join("build-sc.manifest.json"));
    let mb = read_json(&b.path().join("build-sc.manifest.json"));
    assert_eq!(ma["details"], mb["details"]);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(supercon(dir.path(), &["--bogus"]).status.code(), Some(2));
    assert_eq!(supercon(dir.path(), &["frobnicate"]).status.code(), Some(2));
    let o = supercon(dir.path(), &["certify-pair", "--gamma", "0.8"]);
    assert_eq!(o.status.code(), Some(2));
    let o = supercon(dir.path(), &["prob-bound", "--kind", "pair", "--n", "8", "--d", "1", "--delta", "0.6", "--k", "2", "--m", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = supercon(dir.path(), &["build-sc", "--n", "60", "--base", "20"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sample_and_check_expansion() {
    let dir = tempfile::tempdir().unwrap();
    let o = supercon(dir.path(), &["sample-expander", "--n", "16", "--seed", "4", "--simple"]);
    assert_eq!(o.status.code(), Some(0));
    let g = dir.path().join("graph.txt");
    assert!(std::fs::read_to_string(&g).unwrap().starts_with("16 5 0.325 4"));
    let o = supercon(dir.path(), &["check-expansion", "--graph", g.to_str().unwrap(), "--pair"]);
    assert!(matches!(o.status.code(), Some(0 | 1)));
    assert!(dir.path().join("check-expansion.json").exists());
    // a perfect matching cannot expand
    std::fs::write(dir.path().join("m.txt"), "4 explicit\n1\n2\n3\n4\n").unwrap();
    let m = dir.path().join("m.txt");
    let o = supercon(dir.path(), &["check-expansion", "--graph", m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("fails at k = 1"));
}

#[test]
fn probability_commands() {
    let dir = tempfile::tempdir().unwrap();
    let o = supercon(dir.path(), &["prob-bound", "--kind", "pair", "--n", "8", "--d", "1", "--delta", "0", "--k", "2", "--m", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("4/1"));
    let o = supercon(dir.path(), &["mc-plr", "--n", "6", "--ell", "2", "--r", "2", "--d", "1", "--trials", "100"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("1 ± 0"));
    let o = supercon(dir.path(), &["stirling-scan", "--n", "128"]);
    assert_eq!(o.status.code(), Some(0));
    let o = supercon(dir.path(), &["exact-plr", "--n", "6", "--ell", "2", "--r", "3", "--d", "2", "--complement"]);
    assert_eq!(o.status.code(), Some(0));
    assert_ne!(stdout(&o).trim(), "3/5");
}

#[test]
fn threads_flag_gives_same_certificate() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    supercon(a.path(), &["--threads", "1", "certify-pair", "--grid", "80"]);
    supercon(b.path(), &["--threads", "3", "certify-pair", "--grid", "80"]);
    assert_eq!(
        std::fs::read(a.path().join("certify-pair.json")).unwrap(),
        std::fs::read(b.path().join("certify-pair.json")).unwrap()
    );
}
