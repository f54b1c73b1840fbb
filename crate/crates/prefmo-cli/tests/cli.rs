//! End-to-end tests of the `prefmo` binary: fixture documents, result
//! parsing, exit codes and byte-stable reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_prefmo"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn one_state_instance() -> Value {
    json!({
        "schema_version": 1,
        "states": 1,
        "actions": 1,
        "gamma": 0.5,
        "transitions": [{"from": 0, "action": 0, "to": 0, "prob": 1.0}],
        "reward": {"kind": "scalar", "values": [[1.0]]},
        "initial_distribution": [1.0]
    })
}

fn dice_instance() -> Value {
    let transitions: Vec<Value> = (0..9)
        .map(|a| json!({"from": 0, "action": a, "to": 0, "prob": 1.0}))
        .collect();
    json!({
        "schema_version": 1,
        "states": 1,
        "actions": 9,
        "gamma": 0.5,
        "transitions": transitions,
        "reward": {"kind": "scalar", "values": [[2.0, 4.0, 9.0, 1.0, 6.0, 8.0, 3.0, 5.0, 7.0]]},
        "initial_distribution": [1.0]
    })
}

fn dice_policies() -> Value {
    let die = |idx: [usize; 3]| {
        let mut row = vec![0.0; 9];
        for i in idx {
            row[i] = 1.0 / 3.0;
        }
        json!({"kind": "randomized", "probs": [row]})
    };
    json!([die([0, 1, 2]), die([3, 4, 5]), die([6, 7, 8])])
}

fn vector_instance() -> Value {
    json!({
        "schema_version": 1,
        "states": 1,
        "actions": 2,
        "gamma": 0.0,
        "transitions": [
            {"from": 0, "action": 0, "to": 0, "prob": 1.0},
            {"from": 0, "action": 1, "to": 0, "prob": 1.0}
        ],
        "reward": {"kind": "vector", "dim": 2, "values": [[[1.0, 0.0], [0.0, 1.0]]]},
        "initial_distribution": [1.0]
    })
}

#[test]
fn solve_one_state_fixture_yields_two() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "inst.json", &one_state_instance());
    let out = run(&["solve", inst.to_str().unwrap()]);
    let doc = stdout_json(&out);
    let v = doc["outputs"]["values"][0].as_f64().unwrap();
    assert!((v - 2.0).abs() <= 1e-8);
    assert_eq!(doc["outputs"]["policy"]["actions"][0], json!(0));
    assert_eq!(doc["command"], json!("solve"));
}

#[test]
fn bad_probability_sum_exits_2_and_names_state_action() {
    let dir = tempfile::tempdir().unwrap();
    let mut inst = one_state_instance();
    inst["transitions"][0]["prob"] = json!(0.9);
    let path = write(dir.path(), "bad.json", &inst);
    let out = run(&["solve", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("(s=0, a=0)"), "stderr: {stderr}");
}

#[test]
fn strict_mode_rejects_unknown_fields() {
    let dir = tempfile::tempdir().unwrap();
    let mut inst = one_state_instance();
    inst["comment"] = json!("extra");
    let path = write(dir.path(), "extra.json", &inst);
    let lenient = run(&["solve", path.to_str().unwrap()]);
    assert_eq!(lenient.status.code(), Some(0));
    let strict = run(&["--strict", "solve", path.to_str().unwrap()]);
    assert_eq!(strict.status.code(), Some(2));
}

#[test]
fn exact_dice_duel_prints_five_ninths() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "dice.json", &dice_instance());
    let pols = write(dir.path(), "dice-policies.json", &dice_policies());
    let out = run(&[
        "duel",
        inst.to_str().unwrap(),
        "--policies",
        pols.to_str().unwrap(),
        "--horizon",
        "1",
        "--first",
        "0",
        "--second",
        "1",
    ]);
    let doc = stdout_json(&out);
    let p = doc["outputs"]["duel"]["p"].as_f64().unwrap();
    assert!((p - 5.0 / 9.0).abs() <= 1e-12);
    assert_eq!(doc["outputs"]["duel"]["outcome"], json!("first"));
}

#[test]
fn dice_tournament_has_no_condorcet_winner_but_uniform_mix() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "dice.json", &dice_instance());
    let pols = write(dir.path(), "dice-policies.json", &dice_policies());
    let base = [
        inst.to_str().unwrap(),
        "--policies",
        pols.to_str().unwrap(),
        "--horizon",
        "1",
    ];

    let condorcet = stdout_json(&run(&[&["condorcet"], &base[..]].concat()));
    assert_eq!(condorcet["outputs"]["winner"], Value::Null);

    let tournament = stdout_json(&run(&[&["tournament"], &base[..]].concat()));
    assert_eq!(tournament["outputs"]["cycles"], json!([[0, 1, 2]]));

    let mixed = stdout_json(&run(&[&["mixed"], &base[..]].concat()));
    for w in mixed["outputs"]["weights"].as_array().unwrap() {
        assert!((w.as_f64().unwrap() - 1.0 / 3.0).abs() <= 1e-6);
    }
}

#[test]
fn frontier_and_cover_on_incomparable_actions() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "vec.json", &vector_instance());
    let frontier = stdout_json(&run(&["frontier", inst.to_str().unwrap()]));
    assert_eq!(frontier["outputs"]["frontier"].as_array().unwrap().len(), 2);

    let cover = stdout_json(&run(&[
        "cover",
        inst.to_str().unwrap(),
        "--epsilon",
        "0.1",
    ]));
    assert_eq!(cover["outputs"]["verified"], json!(true));
    // (1,0) and (0,1) only cover themselves.
    assert_eq!(cover["outputs"]["cover"].as_array().unwrap().len(), 2);
}

#[test]
fn elicit_recommends_the_oracle_optimal_policy() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "vec.json", &vector_instance());
    let oracle = write(dir.path(), "oracle.json", &json!({"x_star": [0.1, 5.0]}));
    let out = run(&[
        "elicit",
        inst.to_str().unwrap(),
        "--oracle",
        oracle.to_str().unwrap(),
    ]);
    let doc = stdout_json(&out);
    // Hidden weights favor the second objective: action 1 with value (0,1).
    assert_eq!(doc["outputs"]["recommended_policy"], json!([1]));
    assert_eq!(doc["outputs"]["queries"].as_array().unwrap().len(), 1);
}

#[test]
fn transform_rewrites_symbolic_to_vector() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(
        dir.path(),
        "sym.json",
        &json!({
            "schema_version": 1,
            "states": 1,
            "actions": 2,
            "gamma": 0.5,
            "transitions": [
                {"from": 0, "action": 0, "to": 0, "prob": 1.0},
                {"from": 0, "action": 1, "to": 0, "prob": 1.0}
            ],
            "reward": {"kind": "symbolic", "num_labels": 2, "labels": [[1, 2]]},
            "initial_distribution": [1.0],
            "preference": {"ordered_rewards": [1, 2]}
        }),
    );
    let out = run(&["transform", inst.to_str().unwrap(), "--mode", "ordered-rewards"]);
    let doc = stdout_json(&out);
    assert_eq!(doc["outputs"]["instance"]["reward"]["kind"], json!("vector"));
    assert_eq!(doc["outputs"]["instance"]["reward"]["dim"], json!(2));
}

#[test]
fn regret_and_chebyshev_agree() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "vec.json", &vector_instance());
    let chebyshev = stdout_json(&run(&["chebyshev", inst.to_str().unwrap()]));
    let regret = stdout_json(&run(&["regret", inst.to_str().unwrap()]));
    let z = chebyshev["outputs"]["regret"].as_f64().unwrap();
    let r = regret["outputs"]["value"].as_f64().unwrap();
    assert!((z - r).abs() <= 1e-9);
    // Randomizing between (1,0) and (0,1) leaves distance 1/2 to ideal (1,1).
    assert!((z - 0.5).abs() <= 1e-6);
}

#[test]
fn enumeration_cap_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "vec.json", &vector_instance());
    let out = run(&["--cap", "1", "frontier", inst.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_commands_are_byte_stable() {
    let args = ["verify", "--lemma", "1", "--trials", "20", "--seed", "5"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let doc: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["outputs"]["passed"], json!(true));
}

#[test]
fn out_flag_writes_the_same_bytes_as_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "inst.json", &one_state_instance());
    let out_path = dir.path().join("result.json");
    let piped = run(&["solve", inst.to_str().unwrap()]);
    let filed = run(&[
        "--out",
        out_path.to_str().unwrap(),
        "solve",
        inst.to_str().unwrap(),
    ]);
    assert!(filed.status.success());
    assert_eq!(std::fs::read(&out_path).unwrap(), piped.stdout);
}
