use std::process::{Command, Output};

use ris_scb::ScenarioConfig;
use ris_scb_cli::csv::HEADER;

fn ris_scb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ris-scb"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn table_exits_cleanly() {
    let o = ris_scb(&["table2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("diffuse,3.5,3.5,3.5,1449"));
    assert_eq!(ris_scb(&["table2", "--no-golden"]).status.code(), Some(0));
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "clusters = 0\n").unwrap();
    let o = ris_scb(&["feasibility", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let mut cfg = ScenarioConfig::baseline(2);
    cfg.noma.power_alloc = vec![0.7, 0.4];
    std::fs::write(&path, cfg.to_toml().unwrap()).unwrap();
    assert_eq!(
        ris_scb(&["feasibility", "--config", path.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(ris_scb(&["simulate", "--sweep", "bogus=1,2"]).status.code(), Some(2));
}

#[test]
fn missing_config_exits_4() {
    assert_eq!(
        ris_scb(&["feasibility", "--config", "/nonexistent/x.toml"])
            .status
            .code(),
        Some(4)
    );
}

#[test]
fn config_round_trip_through_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("l1.toml");
    std::fs::write(&path, ScenarioConfig::baseline(1).to_toml().unwrap()).unwrap();
    let o = ris_scb(&["feasibility", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("overall: 5"));
}

#[test]
fn simulate_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("op.csv");
    let o = ris_scb(&[
        "simulate",
        "--trials",
        "500",
        "--metrics",
        "OP_user,feasibility_rate",
        "--sweep",
        "N=8,16",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], HEADER);
    assert_eq!(lines.len(), 1 + 2 * 5);
    assert!(lines.iter().any(|l| l.starts_with("N,16,0,0,feasibility_rate,")));
}

#[test]
fn unwritable_output_exits_4() {
    let o = ris_scb(&["table2", "--out", "/nonexistent/dir/t.csv"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn analytic_violation_exits_5_with_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hot.toml");
    let mut cfg = ScenarioConfig::baseline(2);
    cfg.noma.target_rate = vec![2.0, 1.5];
    std::fs::write(&path, cfg.to_toml().unwrap()).unwrap();
    let o = ris_scb(&["analytic", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(5));
    let text = stdout(&o);
    assert!(text.contains(",1,1,assumption_violated,1e0,"));
    assert!(text.contains(",1,1,OP_user,1e0,"));
}

#[test]
fn quantized_validate_skips_closed_forms() {
    let o = ris_scb(&["validate", "--mode", "bits=3", "--trials", "200"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("SKIP closed-form OP/ER"));
}

#[test]
fn omitting_direct_gain_fails_validation() {
    let o = ris_scb(&["validate", "--trials", "5000", "--omit-lb"]);
    assert_eq!(o.status.code(), Some(6));
    assert!(stdout(&o).lines().any(|l| l.starts_with("FAIL ER m=1")));
}

#[test]
fn dump_trial_writes_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("trial.csv");
    let o = ris_scb(&[
        "simulate",
        "--trials",
        "100",
        "--metrics",
        "residue_mean",
        "--dump-trial",
        "4",
        "--dump-out",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&dump).unwrap();
    assert!(text.starts_with("block,row,col,re,im\n"));
    assert!(text.lines().any(|l| l.starts_with("phi,40,1,")));
}

#[test]
fn shipped_configs_match_reference() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let load = |name: &str| ris_scb::load_config(&std::fs::read_to_string(root.join(name)).unwrap()).unwrap();
    assert_eq!(load("baseline.toml"), ScenarioConfig::baseline(2));
    let mut single = ScenarioConfig::baseline(1);
    single.montecarlo.trials = 1_000_000;
    assert_eq!(load("single_antenna.toml"), single);
}
