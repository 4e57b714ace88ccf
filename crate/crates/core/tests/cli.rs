use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_brwre");

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn brwre(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

const GOOD: &str = "dimension = 1\nseed = 4\n[[components]]\nweight = 0.5\npmf = [0.25, 0.25, 0.5]\n[[components]]\nweight = 0.5\npmf = [0.5, 0.25, 0.25]\n";

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let good = write_config(dir.path(), "good.toml", GOOD);
    let out = brwre(&["validate", "--config", &good]);
    assert_eq!(out.status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["report"]["hyp1_ok"], true);

    let zero = write_config(dir.path(), "zero.toml", "[[components]]\nweight = 0.5\npmf = [1.0]\n[[components]]\nweight = 0.5\npmf = [0.0, 1.0]\n");
    assert_eq!(brwre(&["validate", "--config", &zero]).status.code(), Some(2));

    let sure = write_config(dir.path(), "sure.toml", "[[components]]\nweight = 1.0\npmf = [0.0, 0.0, 1.0]\n");
    assert_eq!(brwre(&["validate", "--config", &sure]).status.code(), Some(3));
    assert_eq!(brwre(&["survival", "--config", &sure, "--replicas", "2"]).status.code(), Some(3));
}

#[test]
fn malformed_configs_exit_one() {
    let dir = TempDir::new().unwrap();
    let short = write_config(dir.path(), "short.toml", "[[components]]\nweight = 1.0\npmf = [0.5, 0.4]\n");
    let out = brwre(&["validate", "--config", &short]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("component 0"));

    let typo = write_config(dir.path(), "typo.toml", &format!("horizonn = 5\n{GOOD}"));
    let out = brwre(&["validate", "--config", &typo]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("horizonn"));

    let broken = write_config(dir.path(), "broken.toml", "dimension = = 1\n");
    let out = brwre(&["validate", "--config", &broken]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    assert_eq!(brwre(&["validate", "--config", "/nonexistent.toml"]).status.code(), Some(1));
    assert_eq!(brwre(&["validate"]).status.code(), Some(1));
    assert_eq!(brwre(&["no-such-command"]).status.code(), Some(1));
}

#[test]
fn help_lists_exit_codes() {
    let out = brwre(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("Exit codes"));
    for c in ["validate", "simulate", "polymer", "free-energy", "sweep-rho", "survival", "block-event", "fkg-test", "diagnostics"] {
        assert!(text.contains(c), "{c} missing from help");
    }
}

#[test]
fn free_energy_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.toml", GOOD);
    let run = |out: &str| {
        let o = brwre(&["free-energy", "--config", &cfg, "--t", "20", "--replicas", "8", "--seed", "3", "--out", out]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(Path::new(out).join("free-energy.csv")).unwrap()
    };
    let a = run(&dir.path().join("a").display().to_string());
    let b = run(&dir.path().join("b").display().to_string());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# seed=3"));
    assert_eq!(text.lines().nth(1), Some("replica,env_seed,value"));
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.toml", GOOD);
    let mut tables = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(threads).display().to_string();
        let o = brwre(&["survival", "--config", &cfg, "--replicas", "50", "--horizon", "30", "--threads", threads, "--out", &out]);
        assert_eq!(o.status.code(), Some(0));
        tables.push(fs::read(Path::new(&out).join("survival.csv")).unwrap());
    }
    assert_eq!(tables[0], tables[1]);
}

#[test]
fn simulate_writes_one_row_per_replica() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.toml", GOOD);
    let out = dir.path().join("o").display().to_string();
    let o = brwre(&["simulate", "--config", &cfg, "--replicas", "12", "--horizon", "15", "--box", "4", "--initial", "0:2;2:1", "--out", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(Path::new(&out).join("simulate.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# seed="));
    assert_eq!(lines.next(), Some("replica,tau,capped,final_total,final_occupied"));
    assert_eq!(lines.count(), 12);

    let o = brwre(&["simulate", "--config", &cfg, "--box", "1", "--initial", "3:1", "--out", &out]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn sweep_reports_prediction() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.toml", GOOD);
    let out = dir.path().join("o").display().to_string();
    let o = brwre(&[
        "sweep-rho", "--config", &cfg, "--replicas", "40", "--horizon", "30", "--cap", "500",
        "--rho", "0.5,0.8,1.0", "--t-polymer", "20", "--polymer-replicas", "4", "--out", &out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(summary["rho_c_predicted"].as_f64().is_some());
    let text = fs::read_to_string(Path::new(&out).join("sweep-rho.csv")).unwrap();
    assert_eq!(text.lines().nth(1), Some("rho,proxy,wilson_low,wilson_high"));
    assert_eq!(text.lines().count(), 5);
    let proxies: Vec<f64> = text.lines().skip(2).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(proxies.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn remaining_subcommands_run() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.toml", GOOD);
    let out = dir.path().join("o").display().to_string();
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["polymer", "--t", "10"], "polymer.csv"),
        (vec!["block-event", "--n", "2", "--L", "4", "--T", "6", "--replicas", "20"], "block-event.csv"),
        (vec!["fkg-test", "--t", "5", "--replicas", "50", "--f", "total", "--g", "site:0"], "fkg-test.csv"),
        (vec!["fkg-test", "--t", "5", "--replicas", "50"], "fkg-test.csv"),
        (vec!["diagnostics", "--replicas", "10"], "diagnostics-saturation.csv"),
    ];
    for (args, table) in cases {
        let mut full = args.clone();
        full.extend(["--config", &cfg, "--out", &out]);
        let o = brwre(&full);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let text = fs::read_to_string(Path::new(&out).join(table)).unwrap();
        assert!(text.starts_with("# seed=4"), "{table}");
        let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert!(summary["wall_clock_seconds"].as_f64().is_some());
    }
    let o = brwre(&["fkg-test", "--config", &cfg, "--f", "median", "--g", "total", "--out", &out]);
    assert_eq!(o.status.code(), Some(1));
}
