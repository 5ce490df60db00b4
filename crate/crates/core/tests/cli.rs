use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn so_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_so-lab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::create_dir_all(p.parent().unwrap()).unwrap();
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const C4: &str = r#"{"universe":4,"signature":{"edge":2},"relations":{"edge":[[0,1],[1,0],[1,2],[2,1],[2,3],[3,2],[3,0],[0,3]]}}"#;
const D2: &str = r#"{"universe":4,"signature":{"edge":2},"relations":{"edge":[[0,1],[1,0],[2,3],[3,2]]}}"#;
const EDGE: &str = r#"{"universe":2,"signature":{"edge":2},"relations":{"edge":[[0,1]]}}"#;

#[test]
fn classify_prints_the_label() {
    let o = so_lab(&["classify", "--formula", "EX2 R:2 ALL x EX y R(x,y)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "Sigma(1)");
}

#[test]
fn hamiltonicity_on_files() {
    let dir = TempDir::new().unwrap();
    let c4 = write(dir.path(), "c4.json", C4);
    let d2 = write(dir.path(), "d2.json", D2);
    let o = so_lab(&["eval", "--structure", &c4, "--builtin", "hamiltonian", "--semantics", "full"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "true");
    let o = so_lab(&["eval", "--structure", &d2, "--builtin", "hamiltonian", "--expect", "true"]);
    assert_eq!(stdout(&o).trim(), "false");
    assert_eq!(o.status.code(), Some(1), "a failed expectation is a check failure");
}

#[test]
fn exit_codes_for_bad_input_and_budget() {
    assert_eq!(so_lab(&["parse", "--formula", "EX x R(x,x"]).status.code(), Some(2));
    assert_eq!(so_lab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(so_lab(&["demo", "no_such_demo"]).status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("none.json");
    assert_eq!(
        so_lab(&["eval", "--structure", missing.to_str().unwrap(), "--builtin", "infinite"]).status.code(),
        Some(2)
    );
    let c4 = write(dir.path(), "c4.json", C4);
    let o = so_lab(&["eval", "--structure", &c4, "--builtin", "hamiltonian", "--budget", "1000"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
    let o = so_lab(&["eval", "--structure", &c4, "--builtin", "hamiltonian", "--semantics", "henkin"]);
    assert_eq!(o.status.code(), Some(3), "literal Henkin iteration over 2^16 x 2^16 relations");
}

#[test]
fn ultraproduct_and_henkin_eval() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "fam/a.json", C4);
    write(dir.path(), "fam/b.json", EDGE);
    let fam = dir.path().join("fam");
    let fam = fam.to_str().unwrap();
    let o = so_lab(&["ultraproduct", "--family", fam, "--ultrafilter", "principal:1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["quotient"]["universe"], 2);
    assert_eq!(v["verified"], true);
    let o = so_lab(&[
        "henkin-eval",
        "--family",
        fam,
        "--ultrafilter",
        "principal:0",
        "--formula",
        "EX2 R:1 ALL x (R(x) <-> EX y edge(x,y))",
        "--expect",
        "true",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = so_lab(&["check", "los", "--family", fam, "--ultrafilter", "principal:1", "--builtin", "at_least:3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("agree"));
}

#[test]
fn separation_metric_types_and_omission() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "k/c4.json", C4);
    write(dir.path(), "l/d2.json", D2);
    write(dir.path(), "l/edge.json", EDGE);
    let k = dir.path().join("k");
    let l = dir.path().join("l");
    let (k, l) = (k.to_str().unwrap(), l.to_str().unwrap());
    let frag = write(dir.path(), "frag.json", r#"["ALL x EX y EX z (y != z & edge(x,y) & edge(x,z))", "EX x edge(x,x)"]"#);
    let o = so_lab(&["separate", "--family", k, "--against", l, "--fragment", &frag, "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["distance"], "1");
    assert_eq!(v["separator_verified"], true);
    let o = so_lab(&["check", "metric", "--family", l, "--fragment", &frag, "--against", k]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("set distance: 1"));
    let ctx = write(dir.path(), "ctx.json", r#"{"arities":[1],"fragment":["EX x X0(x)","ALL x (X0(x) -> EX y edge(x,y))"]}"#);
    let o = so_lab(&["types", "--structure", &format!("{l}/edge.json"), "--context", &ctx]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 3);
    let o = so_lab(&["check", "omission", "--family", k, "--pool", l, "--context", &ctx, "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["property_a"]["pass"], v["axiomatization"]["pass"]);
}

#[test]
fn json_reports_are_byte_identical_across_runs() {
    for args in [
        &["check", "los", "--trials", "40", "--seed", "7", "--format", "json"][..],
        &["check", "fubini", "--trials", "10", "--format", "json"],
        &["demo", "separation", "--trials", "10", "--seed", "3", "--format", "json"],
    ] {
        let a = so_lab(args);
        let b = so_lab(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let a = so_lab(&["check", "los", "--trials", "40", "--seed", "7", "--format", "json"]);
    let b = so_lab(&["check", "los", "--trials", "40", "--seed", "8", "--format", "json"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn every_subcommand_explains_itself() {
    for (args, word) in [
        (&["parse"][..], "formula"),
        (&["classify"], "prenex hierarchy"),
        (&["prenex"], "arity raising"),
        (&["eval"], "Henkin"),
        (&["ultraproduct"], "Ultraproduct"),
        (&["henkin-eval"], "decomposable-Henkin"),
        (&["check", "los"], "Łoś"),
        (&["check", "fubini"], "Fubini"),
        (&["check", "metric"], "Ultrametric"),
        (&["check", "omission"], "omitting types"),
        (&["separate"], "Separating"),
        (&["types"], "Types"),
        (&["insep"], "inseparability"),
        (&["demo"], "example"),
    ] {
        let mut full = args.to_vec();
        full.push("--help");
        let o = so_lab(&full);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        assert!(stdout(&o).contains(word), "{args:?} help lacks {word:?}");
    }
}
