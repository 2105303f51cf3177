use std::process::{Command, Output};

use serde_json::Value;

fn fliess(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fliess"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_stdout(args: &[&str]) -> Value {
    let o = fliess(args);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{args:?}: invalid JSON: {e}"))
}

const SPIN: &str = "spin:0.5,x-y";

#[test]
fn enumerates_five_trees_of_order_three() {
    let o = fliess(&["trees", "enum", "--order", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().any(|l| l.starts_with("(())()")));
}

#[test]
fn decorated_enumeration_needs_matching_word() {
    let o = fliess(&["trees", "enum", "--order", "2", "--decorate", "x1x2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 2);
    let bad = fliess(&["trees", "enum", "--order", "3", "--decorate", "x1x2"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn shuffle_of_worked_example_has_three_terms() {
    let o = fliess(&["algebra", "shuffle", "(x1<x2)", "x3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.trim(), "(x1<(x2<x3)) + (x1<(x2>x3)) + ((x1<x2)>x3)");
    let v = json_stdout(&["algebra", "shuffle", "(x1<x2)", "x3", "--json"]);
    assert_eq!(v["count"], 3);
}

#[test]
fn half_shuffles_split_the_shuffle() {
    let prec = json_stdout(&["algebra", "prec", "(x1<x2)", "x3", "--json"]);
    let succ = json_stdout(&["algebra", "succ", "(x1<x2)", "x3", "--json"]);
    assert_eq!(prec["count"].as_u64().unwrap() + succ["count"].as_u64().unwrap(), 3);
}

#[test]
fn char_counts_catalan() {
    let v = json_stdout(&["algebra", "char", "--order", "4", "--letter", "x1", "--json"]);
    assert_eq!(v["count"], 14);
}

#[test]
fn pre_lie_orientations_differ() {
    let a = stdout(&fliess(&["algebra", "prelie", "x1", "x2"]));
    let b = stdout(&fliess(&[
        "algebra",
        "prelie",
        "x1",
        "x2",
        "--orientation",
        "prec-minus-succ",
    ]));
    assert_ne!(a, b);
}

#[test]
fn output_is_byte_identical_across_runs() {
    let cases: [&[&str]; 4] = [
        &["trees", "enum", "--order", "4", "--json"],
        &[
            "magnus",
            "--signal",
            SPIN,
            "--order",
            "3",
            "--grid",
            "200",
            "--compare-rk4",
        ],
        &[
            "fliess", "eval", "--series", "dyson:6", "--signal", SPIN, "--order", "6", "--grid", "200",
        ],
        &["verify", "catalan", "--seed", "3"],
    ];
    for args in cases {
        let a = fliess(args);
        let b = fliess(args);
        assert!(a.status.success(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn every_subcommand_emits_valid_json() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("series.json");
    std::fs::write(
        &series,
        r#"{"m": 1, "growth": {"K": 1, "M": 0.25, "regime": "geometric"},
            "terms": [{"tree": null, "coeff": 1}, {"tree": {"l": null, "x": 1, "r": null}, "coeff": 0.25}]}"#,
    )
    .unwrap();
    let csv = dir.path().join("omega.csv");
    let cases: Vec<Vec<&str>> = vec![
        vec!["trees", "enum", "--order", "3"],
        vec!["trees", "enum", "--order", "3", "--decorate", "x1x2x1"],
        vec!["algebra", "succ", "x1", "2*x2 - x1"],
        vec!["algebra", "prelie", "x1", "x1"],
        vec!["eval", "tree", "--expr", "(x1<x1)", "--signal", SPIN, "--grid", "64"],
        vec![
            "fliess",
            "eval",
            "--series",
            "dyson:4",
            "--signal",
            SPIN,
            "--order",
            "4",
            "--certificate",
        ],
        vec![
            "fliess",
            "eval",
            "--series",
            series.to_str().unwrap(),
            "--signal",
            "const:[[0,1],[-1,0]]",
            "--horizon",
            "0.25",
            "--order",
            "3",
            "--certificate",
        ],
        vec![
            "magnus",
            "--signal",
            SPIN,
            "--order",
            "2",
            "--out",
            csv.to_str().unwrap(),
        ],
        vec!["verify", "axioms"],
    ];
    for mut args in cases {
        args.push("--json");
        json_stdout(&args);
    }
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("t,e11,"));
}

#[test]
fn geometric_series_reports_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("series.json");
    std::fs::write(
        &series,
        r#"{"m": 1, "growth": {"K": 1, "M": 1, "regime": "geometric"}, "terms": [{"tree": {"l": null, "x": 1, "r": null}, "coeff": 1}]}"#,
    )
    .unwrap();
    let v = json_stdout(&[
        "fliess",
        "eval",
        "--series",
        series.to_str().unwrap(),
        "--signal",
        "const:[[0.1]]",
        "--horizon",
        "0.25",
        "--order",
        "2",
        "--certificate",
        "--json",
    ]);
    assert_eq!(v["certificate"]["radius"], 0.5);
    assert_eq!(v["certificate"]["R"], 0.25);
}

#[test]
fn eval_writes_trajectory_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.csv");
    let o = fliess(&[
        "eval",
        "tree",
        "--expr",
        "x1",
        "--signal",
        "const:[[2]]",
        "--grid",
        "4",
        "--horizon",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[0], "t,e11");
    assert_eq!(lines[5], "2,4");
}

#[test]
fn verify_all_passes() {
    let o = fliess(&["verify", "all", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(fliess(&[]).status.code(), Some(2));
    assert_eq!(fliess(&["verify", "everything"]).status.code(), Some(2));
    assert_eq!(fliess(&["trees", "enum"]).status.code(), Some(2));
    assert_eq!(fliess(&["magnus", "--order", "x"]).status.code(), Some(2));
    let o = fliess(&["algebra", "prelie", "x1", "x1", "--orientation", "sideways", "--json"]);
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(v["error"]["kind"], "usage");
}

#[test]
fn validation_errors_exit_one_with_json() {
    let cases: [&[&str]; 5] = [
        &["algebra", "shuffle", "(x1<x2<x3)", "x1", "--json"],
        &["eval", "tree", "--expr", "x3", "--signal", SPIN, "--json"],
        &["eval", "tree", "--expr", "x1", "--signal", "bogus:1", "--json"],
        &["magnus", "--signal", SPIN, "--order", "40", "--json"],
        &[
            "fliess",
            "eval",
            "--series",
            "/nonexistent.json",
            "--signal",
            SPIN,
            "--order",
            "2",
            "--json",
        ],
    ];
    for args in cases {
        let o = fliess(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
        let v: Value = serde_json::from_slice(&o.stderr).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        assert!(v["error"]["kind"].is_string());
        assert!(v["error"]["message"].is_string());
    }
}
