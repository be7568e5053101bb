use std::process::{Command, Output};

fn groupcode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_groupcode"))
        .args(args)
        .env_remove("GROUPCODE_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn dmin_table_has_all_cells() {
    let o = groupcode(&["tables", "dmin"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "r,n=2,n=3,n=4");
    assert_eq!(lines.len(), 7);
    assert!(lines[1].starts_with("3,0.710"));
}

#[test]
fn comparison_table_json() {
    let o = groupcode(&[
        "tables",
        "comparisons",
        "--trials",
        "500",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0]["n"], 4);
}

#[test]
fn verify_exit_codes() {
    let ok = groupcode(&["verify", "--group", "gr1n:3,2", "--all", "--samples", "500"]);
    assert_eq!(ok.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["passed"], true);

    // Minimal leaders on this chain, but not greed compatible.
    let fail = groupcode(&[
        "verify",
        "--group",
        "catalog:g4",
        "--all",
        "--samples",
        "2000",
        "--format",
        "csv",
    ]);
    assert_eq!(fail.status.code(), Some(1));
    let text = stdout(&fail);
    assert!(text.contains("minimal,pass"));
    assert!(text.contains("greed_compatible,fail"));

    let missing = groupcode(&["verify", "--group", "gr1n:3,2"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn simulate_is_deterministic_across_workers() {
    let args = [
        "simulate", "--group", "gr1n:4,3", "--snr", "0:2:20", "--trials", "2000", "--seed", "7",
    ];
    let par = groupcode(&args);
    assert!(par.status.success());
    let text = stdout(&par);
    assert_eq!(text.lines().count(), 12);
    assert!(text.starts_with("snr_db,wer,"));

    let seq = Command::new(env!("CARGO_BIN_EXE_groupcode"))
        .args(args)
        .env("GROUPCODE_WORKERS", "1")
        .output()
        .unwrap();
    assert_eq!(par.stdout, seq.stdout);
}

#[test]
fn simulate_rejects_fast_decoder_for_matrix_groups() {
    let o = groupcode(&[
        "simulate",
        "--group",
        "catalog:g4",
        "--snr",
        "10",
        "--trials",
        "10",
        "--decoder",
        "fast",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn graphs_one_per_stage() {
    let o = groupcode(&["graph", "--group", "gr1n:4,4"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).matches("digraph").count(), 7);
    let one = groupcode(&["graph", "--group", "gr1n:4,4", "--stage", "3"]);
    assert!(stdout(&one).contains("stage3"));
    let bad = groupcode(&["graph", "--group", "gr1n:4,4", "--stage", "8"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn partial_analyze_reports_both_conventions() {
    let o = groupcode(&[
        "partial", "analyze", "--r", "16", "--n", "4", "--ratio", "0.2759",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("stated,16,4,1/1/1/1,"));
    assert!(rows[1].starts_with("scaled,"));

    let small = groupcode(&["partial", "analyze", "--r", "8", "--n", "2", "--m", "2,1"]);
    let line = stdout(&small).lines().nth(1).unwrap().to_string();
    assert!(line.contains(",64,"));
    assert!(!line.ends_with(','), "d_min is computed for small sets");

    let bad = groupcode(&["partial", "analyze", "--r", "8", "--n", "2", "--m", "3,1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn partial_sweep_lists_every_chain() {
    let o = groupcode(&[
        "partial", "sweep", "--r", "8", "--n", "3", "--ratio", "0.5", "--ratio", "1",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1 + 10 * 2);
}

#[test]
fn bad_group_is_an_input_error() {
    for g in ["gr1n:0,3", "catalog:g5", "file:/nonexistent.json", "nope"] {
        let o = groupcode(&["graph", "--group", g]);
        assert_eq!(o.status.code(), Some(2), "{g}");
    }
}

#[test]
fn output_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("groupcode-cli-{}.csv", std::process::id()));
    let o = groupcode(&["tables", "dmin", "-o", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(text.starts_with("r,n=2"));
}
