use std::path::{Path, PathBuf};
use std::process::Command;

use parity_mu::term::{alpha_eq, parse};
use serde_json::Value;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_parity-mu"))
        .args(args)
        .output()
        .expect("binary runs");
    let code = out.status.code().expect("exit code");
    let text = String::from_utf8(out.stdout).expect("utf-8");
    let v = serde_json::from_str(&text).unwrap_or(Value::Null);
    (code, v)
}

fn file(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).expect("write");
    p.display().to_string()
}

#[test]
fn counts_on_the_naturals_game() {
    let (code, v) = run(&["count", fixture("nat.pg").to_str().unwrap(), "--depth", "5"]);
    assert_eq!(code, 0);
    assert_eq!(v["sequence"], serde_json::json!([1, 2, 3, 4, 5, 6]));
    assert_eq!(v["verdict"], "not_stabilized");
    assert_eq!(v["schema"], 1);
}

#[test]
fn least_fixed_point_of_a_variable_is_empty() {
    let dir = TempDir::new().unwrap();
    let f = file(&dir, "x.mu", "(mu X (var X))\n");
    let (code, v) = run(&["eval", &f]);
    assert_eq!(code, 0);
    assert_eq!(v["cardinality"], 0);
    assert_eq!(v["verdict"], "finite");
}

#[test]
fn infinite_values_carry_a_certificate() {
    let (code, v) = run(&[
        "eval",
        fixture("lists.mu").to_str().unwrap(),
        "--env",
        "A=2",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "infinite");
    assert!(v["certificate"].is_string());
}

#[test]
fn solve_reports_the_winner() {
    for (name, winner) in [
        ("eva_dead_end.pg", "Adam"),
        ("adam_dead_end.pg", "Eva"),
        ("eva_loop_odd.pg", "Adam"),
    ] {
        let (code, v) = run(&["solve", fixture(name).to_str().unwrap()]);
        assert_eq!(code, 0, "{name}");
        assert_eq!(v["winner"], winner, "{name}");
    }
}

#[test]
fn assumptions_decide_labelled_leaves() {
    let dir = TempDir::new().unwrap();
    // Eva's only move enters the leaf.
    let f = file(&dir, "leaf.pg", "parity 1;\n0 1 0 1;\n1 0 0 \"var:A\";\n");
    let (code, _) = run(&["solve", &f]);
    assert_eq!(code, 3, "unassumed labels are a validation error");
    let (win, a) = run(&["solve", &f, "--assume", "A=win"]);
    let (lose, b) = run(&["solve", &f, "--assume", "A=lose"]);
    assert_eq!((win, lose), (0, 0));
    assert_eq!(a["winner"], "Eva");
    assert_eq!(b["winner"], "Adam");
}

#[test]
fn unit_translates_to_an_adam_dead_end() {
    let dir = TempDir::new().unwrap();
    let f = file(&dir, "unit.mu", "(prod)\n");
    let (code, v) = run(&["translate", "--to-game", &f]);
    assert_eq!(code, 0);
    let pg = std::fs::read_to_string(v["output"].as_str().unwrap()).unwrap();
    let g = parity_mu::game::parse_pg(&pg).unwrap();
    assert_eq!(g.vertex_count(), 1);
    let v0 = g.initial().unwrap();
    assert!(g.is_dead_end(v0));
    assert_eq!(g.owner(v0), parity_mu::game::Player::Adam);
}

#[test]
fn naturals_game_translates_back() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("nat.mu");
    let (code, _) = run(&[
        "translate",
        "--to-term",
        fixture("nat.pg").to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let t = parse(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(alpha_eq(&t, &parse("(mu X (sum (prod) (var X)))").unwrap()));
}

#[test]
fn translate_keeps_existing_files() {
    let dir = TempDir::new().unwrap();
    let f = file(&dir, "unit.mu", "(prod)\n");
    let pg = file(&dir, "unit.pg", "keep\n");
    let (code, v) = run(&["translate", "--to-game", &f]);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "parse");
    assert_eq!(std::fs::read_to_string(&pg).unwrap(), "keep\n");
    let (code, _) = run(&["translate", "--to-game", &f, "--force"]);
    assert_eq!(code, 0);
    assert_ne!(std::fs::read_to_string(&pg).unwrap(), "keep\n");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = file(&dir, "bad.mu", "(mu X\n");
    assert_eq!(run(&["eval", &bad]).0, 2);
    assert_eq!(run(&["eval", "/nonexistent/x.mu"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    let dangling = file(&dir, "dangling.pg", "parity 1;\n0 0 0 7;\n");
    assert_eq!(run(&["solve", &dangling]).0, 2);
    let moving_leaf = file(&dir, "leaf.pg", "parity 1;\n0 0 0 1;\n1 0 0 0 \"var:A\";\n");
    assert_eq!(run(&["solve", &moving_leaf]).0, 3);
    let free = file(&dir, "free.mu", "(var A)\n");
    assert_eq!(run(&["eval", &free]).0, 3);
    let big = file(
        &dir,
        "big.mu",
        "(prod (var A) (var A) (var A) (var A) (var A) (var A) (var A) (var A))\n",
    );
    assert_eq!(run(&["eval", &big, "--env", "A=20"]).0, 4);
}

#[test]
fn check_passes_on_the_fixtures() {
    let dir = fixture("");
    let mut files: Vec<String> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path().display().to_string())
        .collect();
    files.sort();
    let mut args = vec!["check", "--jobs", "4"];
    args.extend(files.iter().map(String::as_str));
    let (code, v) = run(&args);
    assert_eq!(code, 0, "{v:#}");
    assert_eq!(v["totals"]["fail"], 0);
    assert!(v["totals"]["pass"].as_u64().unwrap() > 100);
}

#[test]
fn selftest_passes() {
    let (code, v) = run(&["selftest", "--seed", "1", "--count", "20"]);
    assert_eq!(code, 0, "{v:#}");
    assert_eq!(v["passed"], true);
}
