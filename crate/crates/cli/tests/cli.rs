use std::process::{Command, Output};

use serde_json::Value;

fn brw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn simulate_figure_histogram() {
    let o = brw(&[
        "simulate", "--lambda", "0.618034", "--depth", "20", "--bins", "1024", "--seed", "1",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("bin,lo,hi,count"));
    let counts: Vec<u64> = lines
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(counts.len(), 1024);
    assert_eq!(counts.iter().sum::<u64>(), 1 << 20);
}

#[test]
fn simulate_depth_zero_is_one_point_at_zero() {
    let o = brw(&["simulate", "--lambda", "0.6", "--depth", "0", "--bins", "8"]);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert!(rows[0].ends_with(",1"));
    assert!(rows[1..].iter().all(|r| r.ends_with(",0")));
}

#[test]
fn identical_flags_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, threads) in [(&a, "1"), (&b, "3")] {
        let o = brw(&[
            "simulate",
            "--lambda",
            "0.7",
            "--depth",
            "14",
            "--bins",
            "64",
            "--seed",
            "9",
            "--threads",
            threads,
            "--output",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn classify_golden_is_pisot() {
    let v = json(&brw(&["classify", "--minpoly=-1,-1,1"]));
    assert_eq!(v["kind"], "Pisot");
}

#[test]
fn cover_at_point_seven() {
    let v = json(&brw(&["cover", "--lambda", "0.7"]));
    assert_eq!(v["success"], true);
    assert_eq!(v["L"], 4);
    assert!(v["c"].as_f64().unwrap() > 0.0);
}

#[test]
fn exit_codes() {
    assert_eq!(brw(&["spectrum", "--lambda", "0"]).status.code(), Some(2));
    assert_eq!(brw(&["spectrum"]).status.code(), Some(2));
    assert_eq!(brw(&["nonsense"]).status.code(), Some(2));
    let guard = brw(&["simulate", "--lambda", "0.6", "--depth", "40"]);
    assert_eq!(guard.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&guard.stderr).contains("limit"));
    assert_eq!(
        brw(&["separation", "--lambda", "0.6", "--n-max", "30"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(brw(&["--help"]).status.code(), Some(0));
}

#[test]
fn gaps_csv_schema() {
    let o = brw(&["gaps", "--minpoly=-1,-1,1", "--depth", "10", "--seed", "3"]);
    let text = stdout(&o);
    assert!(text.starts_with("level,alpha,beta,width\n"));
    for row in text.lines().skip(1) {
        let f: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(f[0], 10.0);
        assert!((f[2] - f[1] - f[3]).abs() < 1e-12 && f[3] > 0.0);
    }
}

#[test]
fn separation_first_row() {
    let text = stdout(&brw(&["separation", "--minpoly=-1,-1,1", "--n-max", "3"]));
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "1");
    assert_eq!(row[2], "1.0");
}

#[test]
fn probe_report_shape() {
    let v = json(&brw(&[
        "probe",
        "--minpoly=-1,-1,1",
        "--probes",
        "20",
        "--n-max",
        "16",
    ]));
    assert_eq!(v["ell_star"], 3);
    assert_eq!(v["reports"].as_array().unwrap().len(), 20);
    let outside = brw(&["probe", "--minpoly=-1,-1,1", "--q", "-1/2"]);
    assert_eq!(outside.status.code(), Some(2));
}

#[test]
fn expansions_actions() {
    let g = stdout(&brw(&[
        "expansions",
        "greedy",
        "--minpoly=-1,-1,1",
        "--x",
        "1",
        "--depth",
        "4",
    ]));
    let digits: Vec<&str> = g
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(digits, ["1", "1", "0", "0"]);
    let e = json(&brw(&["expansions", "eqstar", "--lambda", "0.9"]));
    assert_eq!(e["L"], 3);
    let c = stdout(&brw(&[
        "expansions",
        "count",
        "--lambda",
        "0.7",
        "--depth",
        "3",
    ]));
    assert_eq!(c.lines().count(), 4);
}

#[test]
fn config_file_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"subcommand": "gw", "depths": [1, 2], "reps": 2000, "seed": 4}"#,
    )
    .unwrap();
    let a = stdout(&brw(&["--config", cfg.to_str().unwrap()]));
    let b = stdout(&brw(&[
        "gw", "--depths", "1,2", "--reps", "2000", "--seed", "4",
    ]));
    assert_eq!(a, b);
    assert!(a.starts_with("n,probability,stderr\n"));
    // command-line flags override the file
    let c = stdout(&brw(&[
        "gw",
        "--config",
        cfg.to_str().unwrap(),
        "--reps",
        "3000",
    ]));
    assert_ne!(a, c);
}

#[test]
fn moments_columns() {
    let text = stdout(&brw(&[
        "moments",
        "--lambda",
        "0.7",
        "--depth",
        "8",
        "--points",
        "5",
        "--t-max",
        "4",
        "--mc-reps",
        "200",
        "--shell",
        "2",
    ]));
    assert!(text.starts_with("t,expected,mc,mc_stderr,bound,in_range\n"));
    let first: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first[1], "1.0");
    assert_eq!(text.lines().count(), 6);
}
