use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rsutrust(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rsutrust"))
        .args(args)
        .env_remove("RSUTRUST_OUT")
        .output()
        .unwrap()
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap()
}

fn csv_rows(p: &Path) -> Vec<Vec<String>> {
    read(p)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn run_writes_self_describing_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a");
    let o = rsutrust(&["run", "--preset", "fuzzy-compare", "--seed", "42", "--mode", "fuzzy", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["trace.csv", "verdicts.csv", "transitions.csv", "density_start.csv", "density_end.csv", "summary.csv", "config.toml"] {
        let body = read(&out.join(f));
        let first = body.lines().next().unwrap();
        assert!(first.starts_with("# preset=fuzzy-compare seed=42 mode=fuzzy config_hash="), "{f}: {first}");
    }
    assert_eq!(read(&out.join("trace.csv")).lines().nth(1).unwrap(), "time_s,vehicle_id,trust");
    let sender = csv_rows(&out.join("summary.csv")).into_iter().find(|r| r[0] == "0").unwrap();
    assert_eq!(sender[1], "sender");
    assert_eq!(sender[3], "0.900000", "the truthful sender ends at the ceiling");
}

#[test]
fn fixed_compare_reports_time_to_blacklist() {
    let dir = tempfile::tempdir().unwrap();
    let o = rsutrust(&["run", "--preset", "fixed-compare", "--seed", "42", "--mode", "fixed", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let sender = csv_rows(&dir.path().join("summary.csv")).into_iter().find(|r| r[0] == "0").unwrap();
    assert!(!sender[10].is_empty(), "time_to_blacklist missing: {sender:?}");
}

#[test]
fn identical_flags_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let o = rsutrust(&["run", "--preset", "sender-0.3", "--seed", "9", "--out", d.to_str().unwrap()]);
        assert!(o.status.success());
    }
    for f in ["trace.csv", "verdicts.csv", "transitions.csv", "summary.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn unknown_preset_is_a_usage_error_with_no_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let o = rsutrust(&["run", "--preset", "no-such", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown preset"));
    assert!(!out.exists());
}

#[test]
fn exit_codes_by_failure_class() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(rsutrust(&["run"]).status.code(), Some(1));
    assert_eq!(rsutrust(&["sweep", "--preset", "fixed-compare", "--seeds", "", "--out", d]).status.code(), Some(1));
    assert_eq!(rsutrust(&["run", "--preset", "fixed-compare", "--duration=-5", "--out", d]).status.code(), Some(2));
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "not = [valid").unwrap();
    let o = rsutrust(&["run", "--preset", "fixed-compare", "--fuzzy-config", bad.to_str().unwrap(), "--out", d]);
    assert_eq!(o.status.code(), Some(2));
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = rsutrust(&["run", "--preset", "fixed-compare", "--out", blocker.join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(rsutrust(&["--help"]).status.code(), Some(0));
}

#[test]
fn output_dir_defaults_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("env-out");
    let o = Command::new(env!("CARGO_BIN_EXE_rsutrust"))
        .args(["run", "--preset", "fixed-0.9", "--duration", "800"])
        .env("RSUTRUST_OUT", &out)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(out.join("trace.csv").exists());
}

#[test]
fn sweep_aggregates_over_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let o = rsutrust(&["sweep", "--preset", "fixed-compare", "--seeds", "1-10", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    for s in 1..=10 {
        assert!(dir.path().join(format!("seed-{s}/trace.csv")).exists());
    }
    let agg = read(&dir.path().join("aggregate.csv"));
    assert!(agg.starts_with("# preset=fixed-compare seeds=1,2,3,4,5,6,7,8,9,10 mode=fixed"));
    let rows = csv_rows(&dir.path().join("aggregate.csv"));
    let sender = rows.iter().find(|r| r[0] == "0").unwrap();
    let rate: f64 = sender[5].parse().unwrap();
    assert!((0.0..=1.0).contains(&rate));
    assert_eq!(sender[2], "10");
}

#[test]
fn single_seed_sweep_matches_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let run_dir = dir.path().join("run");
    let sweep_dir = dir.path().join("sweep");
    assert!(rsutrust(&["run", "--preset", "sender-0.7", "--seed", "3", "--out", run_dir.to_str().unwrap()]).status.success());
    assert!(rsutrust(&["sweep", "--preset", "sender-0.7", "--seeds", "3", "--out", sweep_dir.to_str().unwrap()]).status.success());
    let summary: Vec<Vec<String>> = csv_rows(&run_dir.join("summary.csv"));
    let agg = csv_rows(&sweep_dir.join("aggregate.csv"));
    for row in agg {
        let s = summary.iter().find(|r| r[0] == row[0]).unwrap();
        assert_eq!(row[3], s[3], "mean of one run is that run's final trust");
        assert_eq!(row[4], "0.000000");
    }
    assert_eq!(
        fs::read(run_dir.join("trace.csv")).unwrap(),
        fs::read(sweep_dir.join("seed-3/trace.csv")).unwrap()
    );
}

#[test]
fn exported_lookup_has_the_worked_example_row() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lookup.csv");
    let o = rsutrust(&["export-lookup", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let body = read(&path);
    let rows: Vec<&str> = body.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 11 * 13 * 101);
    let row = rows.iter().find(|r| r.starts_with("0.800000,4,0.330000,")).unwrap();
    let reward: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
    assert!((reward - 0.030014).abs() < 0.01);
}

#[test]
fn lookup_cache_is_built_then_reused() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache.csv");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    let args = |out: &Path| {
        vec![
            "run".to_string(),
            "--preset".into(),
            "fuzzy-compare".into(),
            "--out".into(),
            out.to_str().unwrap().into(),
            "--lookup-cache".into(),
            cache.to_str().unwrap().into(),
        ]
    };
    let run = |v: Vec<String>| rsutrust(&v.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(run(args(&a)).status.success());
    assert!(cache.exists());
    assert!(run(args(&b)).status.success());
    assert_eq!(fs::read(a.join("trace.csv")).unwrap(), fs::read(b.join("trace.csv")).unwrap());
    let direct = rsutrust(&["run", "--preset", "fuzzy-compare", "--out", c.to_str().unwrap()]);
    assert!(direct.status.success());

    let text = read(&cache).replacen("fuzzy_config_hash=", "fuzzy_config_hash=0", 1);
    fs::write(&cache, text).unwrap();
    assert_eq!(run(args(&a)).status.code(), Some(2), "stale cache is rejected");
}

#[test]
fn gnuplot_layout_is_optional() {
    let dir = tempfile::tempdir().unwrap();
    let o = rsutrust(&["run", "--preset", "fixed-compare", "--gnuplot", "--trace-cadence", "100", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let dat = read(&dir.path().join("trace.dat"));
    assert!(dat.contains("# vehicle 0\n0.000 "));
}

#[test]
fn presets_are_listed() {
    let o = rsutrust(&["presets"]);
    let s = String::from_utf8(o.stdout).unwrap();
    for n in ["uniform-0.4-0.5", "fixed-0.9", "sender-0.3", "sender-0.7", "fuzzy-compare", "fixed-compare"] {
        assert!(s.contains(n));
    }
}
