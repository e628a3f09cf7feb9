use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coarse-lab"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn json_out(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn tile_then_verify_round_trip() {
    let dir = TempDir::new().unwrap();
    write(&dir, "z.json", r#"{"interval": [0, 400]}"#);
    let out = run(
        dir.path(),
        &["tile", "--strategy", "interval", "--R", "2", "--epsilon", "1/10", "--in", "z.json", "--out", "t.json"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(dir.path(), &["--json", "verify-tiling", "--in", "t.json"]);
    assert_eq!(code(&out), 0);
    let report = json_out(&out);
    assert_eq!(report["result"]["pass"], true);
    assert_eq!(report["status"], "ok");
}

#[test]
fn sparse_and_box_tilings_verify() {
    let dir = TempDir::new().unwrap();
    let squares: Vec<String> = (0..=60).map(|k| (k * k).to_string()).collect();
    write(&dir, "sq.json", &format!(r#"{{"integers": [{}]}}"#, squares.join(",")));
    let out = run(
        dir.path(),
        &["tile", "--strategy", "sparse", "--R", "1", "--epsilon", "1/4", "--in", "sq.json", "--out", "s.json", "--prefix"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(code(&run(dir.path(), &["verify-tiling", "--in", "s.json"])), 0);

    write(&dir, "box.json", r#"{"moduli": [2, 4, 8, 16, 32, 64, 128]}"#);
    let out = run(
        dir.path(),
        &["tile", "--strategy", "box", "--R", "1", "--epsilon", "1/3", "--in", "box.json", "--out", "b.json"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(code(&run(dir.path(), &["verify-tiling", "--in", "b.json"])), 0);
}

#[test]
fn tampered_tiling_fails_verification() {
    let dir = TempDir::new().unwrap();
    write(&dir, "z.json", r#"{"interval": [0, 100]}"#);
    run(
        dir.path(),
        &["tile", "--strategy", "interval", "--R", "1", "--epsilon", "1/5", "--in", "z.json", "--out", "t.json"],
    );
    let mut t: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("t.json")).unwrap()).unwrap();
    t["epsilon"] = Value::String("1/1000".into());
    write(&dir, "t.json", &t.to_string());
    let out = run(dir.path(), &["--json", "verify-tiling", "--in", "t.json"]);
    assert_eq!(code(&out), 1);
    let report = json_out(&out);
    assert!(!report["result"]["failing"].as_array().unwrap().is_empty());

    let tiles = t["tiles"].as_array_mut().unwrap();
    let first = tiles[0].as_array().unwrap()[0].clone();
    tiles[1].as_array_mut().unwrap().push(first);
    t["epsilon"] = Value::String("1/5".into());
    write(&dir, "t.json", &t.to_string());
    let out = run(dir.path(), &["--json", "verify-tiling", "--in", "t.json"]);
    assert_eq!(code(&out), 1);
    assert!(json_out(&out)["result"]["partition_error"]["overlapping"].as_array().is_some_and(|v| !v.is_empty()));
}

#[test]
fn castle_refusal_names_the_tower() {
    let dir = TempDir::new().unwrap();
    write(
        &dir,
        "c.json",
        r#"{"towers": [
            {"height": 3, "columns": [["a0", "a1", "a2"], ["b0", "b1", "b2"]]},
            {"height": 2, "columns": [["c0", "c1"]]}
        ]}"#,
    );
    write(&dir, "a.json", r#"["a0", "b0"]"#);
    write(&dir, "b.json", r#"["a1", "b1", "a2", "b2", "c0"]"#);
    let out = run(dir.path(), &["--json", "castle", "compare", "--castle", "c.json", "--a", "b.json", "--b", "a.json"]);
    assert_eq!(code(&out), 1);
    let result = &json_out(&out)["result"];
    assert_eq!(result["outcome"], "refusal");
    assert_eq!(result["origin"], 0);
    assert_eq!((result["e"].as_u64(), result["f"].as_u64()), (Some(2), Some(1)));

    let out = run(dir.path(), &["--json", "castle", "compare", "--castle", "c.json", "--a", "a.json", "--b", "b.json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_out(&out)["result"]["outcome"], "witness");
}

#[test]
fn duplicate_atom_is_rejected_by_name() {
    let dir = TempDir::new().unwrap();
    write(&dir, "c.json", r#"{"towers": [{"height": 1, "columns": [["p"], ["q"], ["p"]]}]}"#);
    write(&dir, "a.json", r#"["p"]"#);
    let out = run(dir.path(), &["castle", "compare", "--castle", "c.json", "--a", "a.json", "--b", "a.json"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"p\""));

    let out = run(dir.path(), &["castle", "validate", "--castle", "c.json"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"p\""));
}

#[test]
fn input_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    write(&dir, "z.json", r#"{"interval": [0, 50]}"#);
    let eps = run(dir.path(), &["tile", "--strategy", "interval", "--R", "1", "--epsilon", "3/0", "--in", "z.json"]);
    assert_eq!(code(&eps), 2);
    let missing = run(dir.path(), &["verify-tiling", "--in", "absent.json"]);
    assert_eq!(code(&missing), 2);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("absent.json"));
    assert_eq!(code(&run(dir.path(), &["transmogrify"])), 2);

    write(&dir, "p.json", r#"{"rank": 2, "relations": [[[1, 0], [0]]]}"#);
    let bad = run(dir.path(), &["monoid", "equal", "--presentation", "p.json", "--u", "1,0", "--v", "0,1"]);
    assert_eq!(code(&bad), 2);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("relations[0][1]"));
}

#[test]
fn monoid_verdicts_set_exit_codes() {
    let dir = TempDir::new().unwrap();
    write(&dir, "p.json", r#"{"rank": 1, "relations": [[[1], [2]]]}"#);
    let yes = run(dir.path(), &["--json", "monoid", "leq", "--presentation", "p.json", "--u", "2", "--v", "1"]);
    assert_eq!(code(&yes), 0);
    assert_eq!(json_out(&yes)["result"]["verdict"], "yes");

    write(&dir, "free.json", r#"{"rank": 1, "relations": []}"#);
    let no = run(dir.path(), &["monoid", "leq", "--presentation", "free.json", "--u", "2", "--v", "1"]);
    assert_eq!(code(&no), 1);
}

#[test]
fn reports_are_deterministic_and_carry_a_header() {
    let dir = TempDir::new().unwrap();
    write(&dir, "z.json", r#"{"interval": [0, 300]}"#);
    let args = [
        "--seed", "7", "tile", "--strategy", "interval", "--R", "3", "--epsilon", "1/8", "--in", "z.json", "--report",
    ];
    let mut a = args.to_vec();
    a.push("r1.json");
    let mut b = args.to_vec();
    b.push("r2.json");
    assert_eq!(code(&run(dir.path(), &a)), 0);
    assert_eq!(code(&run(dir.path(), &b)), 0);
    let r1 = std::fs::read(dir.path().join("r1.json")).unwrap();
    let r2 = std::fs::read(dir.path().join("r2.json")).unwrap();
    assert_eq!(r1, r2);
    let report: Value = serde_json::from_slice(&r1).unwrap();
    assert_eq!(report["header"]["tool"], "coarse-lab");
    assert_eq!(report["header"]["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(report["header"]["seed"], 7);
    assert_eq!(report["header"]["params"]["tile"]["epsilon"], "1/8");
}

#[test]
fn fill_and_paradox_on_small_windows() {
    let dir = TempDir::new().unwrap();
    write(&dir, "z.json", r#"{"interval": [0, 40]}"#);
    write(&dir, "c.json", r#"{"coeffs": {"10": 3, "20": -3}}"#);
    let out = run(dir.path(), &["--json", "homology-fill", "--in", "z.json", "--chain", "c.json", "--P", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_out(&out)["result"]["norm"], 3);

    write(&dir, "f.json", r#"["10", "11", "12", "13", "14", "15", "16", "17"]"#);
    let witness = run(dir.path(), &["paradox", "--in", "z.json", "--set", "f.json", "--R", "1"]);
    assert_eq!(code(&witness), 1);
    let witness = run(dir.path(), &["paradox", "--in", "z.json", "--set", "f.json", "--R", "8"]);
    assert_eq!(code(&witness), 0);
}
