use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_colpitts-sync"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn colpitts-sync")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

/// Small optimizer setup so the tests stay quick.
const SMALL: &str = r#"
seed = 3
[objective]
dt = 0.01
t_final = 5.0
[sso]
np = 4
stages = 3
[pso]
swarm = 4
iters = 3
"#;

fn small_config(dir: &TempDir) -> String {
    let p = dir.path().join("small.toml");
    fs::write(&p, SMALL).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn simulate_writes_trajectory_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = run(&["simulate", "--t-final", "20", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let csv_a = fs::read(a.join("simulate.csv")).unwrap();
    assert_eq!(csv_a, fs::read(b.join("simulate.csv")).unwrap());
    let (header, rows) = csv_rows(&a.join("simulate.csv"));
    assert_eq!(header, ["t", "x", "y", "z"]);
    assert_eq!(rows.len(), 20_000 / 10 + 1);
    assert_eq!(rows[0], vec![0.0, 8.0, 2.0, 3.0]);
    assert!(rows.iter().all(|r| r[1..].iter().all(|v| v.abs() < 100.0)));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("simulate.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["schema"], "colpitts-sync/manifest/v1");
    assert_eq!(manifest["config"]["single"]["t_final"], 20.0);
}

#[test]
fn zero_dt_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = run(&["simulate", "--dt", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("dt must be positive"), "{}", stderr(&o));
}

#[test]
fn divergence_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let o = run(&["simulate", "--dt", "5", "--t-final", "5000", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("diverged"));
}

#[test]
fn sync_reference_run_synchronizes() {
    let dir = TempDir::new().unwrap();
    let o = run(&["sync", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = csv_rows(&dir.path().join("sync.csv"));
    assert_eq!(
        header,
        ["t", "x_m", "y_m", "z_m", "x_s", "y_s", "z_s", "e1", "e2", "e3", "u", "v3"]
    );
    let last = rows.last().unwrap();
    assert_eq!(last[0], 70.0);
    assert!(last[7..10].iter().all(|e| e.abs() < 1e-4), "{last:?}");
    // controller is off before t = 20
    assert!(rows.iter().filter(|r| r[0] < 20.0).all(|r| r[10] == 0.0));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sync.manifest.json")).unwrap()).unwrap();
    assert!(manifest["results"]["tss"].as_f64().unwrap() > 0.0);
}

#[test]
fn sync_without_activation_has_zero_control() {
    let dir = TempDir::new().unwrap();
    let o = run(&["sync", "--t-activate", "70", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = csv_rows(&dir.path().join("sync.csv"));
    assert!(rows.iter().all(|r| r[10] == 0.0));
}

#[test]
fn sync_identical_ics_has_zero_error() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("same.toml");
    fs::write(
        &cfg,
        "[sync]\nt_final = 10.0\nt_activate = 5.0\nmaster_ic = [8.0, 2.0, 3.0]\nslave_ic = [8.0, 2.0, 3.0]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = run(&["sync", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = csv_rows(&out.join("sync.csv"));
    assert!(rows.iter().all(|r| r[7] == 0.0 && r[8] == 0.0 && r[9] == 0.0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("tss = 0"));
}

#[test]
fn sync_rejects_invalid_gains() {
    let dir = TempDir::new().unwrap();
    for args in [["--k1", "0.8"], ["--k3=-1", "--dt=1e-3"]] {
        let mut all = vec!["sync", "--out", dir.path().to_str().unwrap()];
        all.extend(args);
        let o = run(&all);
        assert_eq!(o.status.code(), Some(1));
        assert!(stderr(&o).contains("invalid gains"), "{}", stderr(&o));
    }
}

#[test]
fn unknown_algorithm_is_a_usage_error() {
    let o = run(&["optimize", "--algo", "foo"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn optimize_is_deterministic_for_both_algorithms() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(&dir);
    for algo in ["sso", "pso"] {
        let a = dir.path().join(format!("{algo}_a"));
        let b = dir.path().join(format!("{algo}_b"));
        for out in [&a, &b] {
            let o = run(&["optimize", "--algo", algo, "--config", &cfg, "--out", out.to_str().unwrap()]);
            assert!(o.status.success(), "{}", stderr(&o));
        }
        for name in [format!("optimize_{algo}.csv"), format!("optimize_{algo}.json")] {
            assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name}");
        }
        let (header, rows) = csv_rows(&a.join(format!("optimize_{algo}.csv")));
        assert_eq!(header, ["stage", "best_cost", "best_k1", "best_k3", "cumulative_evals"]);
        assert_eq!(rows.len(), 3);
        assert!(rows.windows(2).all(|w| w[1][1] <= w[0][1]));
    }
}

#[test]
fn manifest_reruns_bit_identically() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(&dir);
    let first = dir.path().join("first");
    let o = run(&["optimize", "--algo", "sso", "--seed", "9", "--config", &cfg, "--out", first.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let again = dir.path().join("again");
    let manifest = first.join("optimize_sso.manifest.json");
    let o = run(&["optimize", "--algo", "sso", "--config", manifest.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["optimize_sso.csv", "optimize_sso.json"] {
        assert_eq!(fs::read(first.join(name)).unwrap(), fs::read(again.join(name)).unwrap());
    }
    let res: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(again.join("optimize_sso.json")).unwrap()).unwrap();
    assert_eq!(res["seed"], 9);
}

#[test]
fn table_rows_and_aggregates() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(&dir);
    let one = dir.path().join("one");
    let o = run(&["table", "--algo", "pso", "--repeats", "1", "--config", &cfg, "--out", one.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = csv_rows(&one.join("table_pso.csv"));
    assert_eq!(header, ["experiment", "k1", "k3", "tss"]);
    assert_eq!(rows.len(), 1);
    let agg = fs::read_to_string(one.join("table_pso_aggregate.csv")).unwrap();
    let tss = format!("{}", rows[0][3]);
    let lines: Vec<&str> = agg.lines().collect();
    assert_eq!(lines[0], "statistic,tss");
    for (line, stat) in lines[1..4].iter().zip(["min", "median", "max"]) {
        let (name, value) = line.split_once(',').unwrap();
        assert_eq!(name, stat);
        assert_eq!(value.parse::<f64>().unwrap().to_string(), tss);
    }
    assert_eq!(lines[4], "spread,0");

    let three = dir.path().join("three");
    let o = run(&["table", "--algo", "sso", "--repeats", "3", "--config", &cfg, "--out", three.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = csv_rows(&three.join("table_sso.csv"));
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), vec![1.0, 2.0, 3.0]);
    // experiment i uses seed base + i - 1; the first row matches a single run
    let single = dir.path().join("single");
    let o = run(&["optimize", "--algo", "sso", "--config", &cfg, "--out", single.to_str().unwrap()]);
    assert!(o.status.success());
    let res: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(single.join("optimize_sso.json")).unwrap()).unwrap();
    let best = res["best_cost"].as_f64().unwrap();
    assert!((rows[0][3] - best).abs() <= 1e-8 * best);
}

#[test]
fn help_exits_cleanly() {
    let o = run(&["--help"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("simulate"));
}
