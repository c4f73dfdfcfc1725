use std::path::Path;
use std::process::{Command, Output};

use siegelkit::cli::RunConfig;

fn siegelkit(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_siegelkit"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn as_f64(v: &serde_json::Value) -> f64 {
    v.as_str().and_then(|s| s.parse().ok()).expect("decimal string")
}

#[test]
fn decompose_prints_iwasawa_data() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("m.txt"), "2 1; 0 1").unwrap();
    let o = siegelkit(&["decompose", "--matrix", "m.txt", "--precision", "128", "--json"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let grid = |key: &str| -> Vec<Vec<f64>> {
        v[key].as_array().unwrap().iter().map(|r| r.as_array().unwrap().iter().map(as_f64).collect()).collect()
    };
    assert_eq!(grid("nu"), vec![vec![1.0, 1.0], vec![0.0, 1.0]]);
    assert_eq!(grid("kappa"), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    let alpha: Vec<f64> = v["alpha"].as_array().unwrap().iter().map(as_f64).collect();
    assert_eq!(alpha, vec![2.0, 1.0]);

    let text = siegelkit(&["decompose", "--matrix", "m.txt"], dir.path());
    assert!(stdout(&text).contains("alpha = (2.00000000000e0, 1.00000000000e0)"));
}

#[test]
fn segments_prints_partition_and_witness() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("t1.txt"), "1 1 1; 1 0 0; 0 1 0").unwrap();
    std::fs::write(dir.path().join("t2.json"), r#"[["1","1","1"],["0","0","1"],["0","1","0"]]"#).unwrap();
    let o = siegelkit(&["segments", "--matrix", "t1.txt", "--pair", "3,1"], dir.path());
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("partition: {1,2,3}"), "{out}");
    assert!(out.contains("leading entries: (1,1) (2,1) (3,2)"), "{out}");
    assert!(out.contains("witness (3,1): (3,2) (2,1)"), "{out}");
    let o = siegelkit(&["segments", "--matrix", "t2.json"], dir.path());
    assert!(stdout(&o).contains("partition: {1},{2,3}"));
    let o = siegelkit(&["segments", "--matrix", "t2.json", "--pair", "2,1"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("same segment"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("sing.txt"), "1 2; 2 4").unwrap();
    let o = siegelkit(&["decompose"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--matrix"));
    let o = siegelkit(&["reduce", "--matrix", "sing.txt"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("singular"));
    let o = siegelkit(&["reduce", "--matrix", "sing.txt", "--u", "1/4"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("u >= 1/2"));
    let o = siegelkit(&["decompose", "--matrix", "sing.txt", "--precision", "8"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(siegelkit(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn reduce_and_membership() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("g.txt"), "1 0; 7 1").unwrap();
    let o = siegelkit(&["reduce", "--matrix", "g.txt", "--json"], dir.path());
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let delta: Vec<Vec<i64>> = serde_json::from_value::<Vec<Vec<String>>>(v["delta"].clone())
        .unwrap()
        .iter()
        .map(|r| r.iter().map(|s| s.parse().unwrap()).collect())
        .collect();
    assert_eq!((delta[0][0] * delta[1][1] - delta[0][1] * delta[1][0]).abs(), 1);
    let o = siegelkit(&["membership", "--matrix", "g.txt"], dir.path());
    assert!(stdout(&o).starts_with("in_siegel = false"));
}

#[test]
fn experiment_csv_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"dims":[2,3],"denominators":[1,2],"samples":15,"seed":11,
                  "n_law":{"law":"log_uniform","min":1,"max":500}}"#;
    std::fs::write(dir.path().join("cfg.json"), cfg).unwrap();
    let run = |threads: &str, file: &str| {
        let o = siegelkit(&["experiment", "--config", "cfg.json", "--threads", threads, "--csv", file], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(dir.path().join(file)).unwrap()
    };
    let a = run("1", "a.csv");
    let b = run("4", "b.csv");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("seed,n,N,D,H,r32,r33,r34,r35,r36,r37,rH,ms\n"));
    assert_eq!(text.lines().count(), 1 + 60);

    let o = siegelkit(&["experiment", "--config", "cfg.json", "--json", "--emit-matrices", "--seed", "3"], dir.path());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"]["seed"], 3);
    assert!(v["records"][0]["matrices"]["gamma"].is_array());
}

#[test]
fn gl2_writes_one_row_per_isogeny() {
    let dir = tempfile::tempdir().unwrap();
    let o = siegelkit(&["gl2", "--x", "0,1", "--nmax", "12", "--csv", "h.csv"], dir.path());
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("h.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,idx,a,b,d,H,ratio"));
    let sigma: u64 = (1..=12u64).map(|n| (1..=n).filter(|k| n % k == 0).sum::<u64>()).sum();
    assert_eq!(lines.count() as u64, sigma);
    let summary: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(summary["matrices"], sigma);
}

#[test]
fn standardize_reports_scaled_cone() {
    let dir = tempfile::tempdir().unwrap();
    let triple = r#"{"flag":[["1","0"],["0","1"]],"form":[["4","0"],["0","1"]],"t":"sqrt3over2","omega":[[["1","0"],["0","1"]]]}"#;
    std::fs::write(dir.path().join("triple.json"), triple).unwrap();
    let o = siegelkit(&["standardize", "--triple", "triple.json", "--verify", "30"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((as_f64(&v["s"]) - 3f64.sqrt() / 4.0).abs() < 1e-15);
    assert_eq!(as_f64(&v["u_prime"]), 0.0);
    assert_eq!(v["containment"]["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn saved_config_replays() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("m.txt"), "3 1; 1 1").unwrap();
    let o = siegelkit(&["reduce", "--matrix", "m.txt", "--t", "sqrt(1/2)", "--save-config", "run.json"], dir.path());
    assert!(o.status.success());
    let saved: RunConfig = serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    let reparsed = <RunConfig as clap::Parser>::try_parse_from([
        "siegelkit", "reduce", "--matrix", "m.txt", "--t", "sqrt(1/2)", "--save-config", "run.json",
    ])
    .unwrap();
    assert_eq!(saved, reparsed);
}
