use std::path::Path;
use std::process::{Command, Output};

fn mtl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtl"))
        .args(args)
        .env_remove("MTL_CONFIG")
        .env_remove("MTL_THREADS")
        .env_remove("MTL_FORMAT")
        .env_remove("MTL_OUT")
        .output()
        .expect("run mtl")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn manifest(out: &Path) -> serde_json::Value {
    let mut p = out.as_os_str().to_owned();
    p.push(".manifest.json");
    let text = std::fs::read_to_string(p).expect("manifest written");
    serde_json::from_str(&text).unwrap()
}

#[test]
fn plain_ternary_all_strategies_agree() {
    let text = stdout(&mtl(&["sum", "--builtin", "plain_ternary", "--n", "6", "--m", "6", "--strategy", "all"]));
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    let names: Vec<&str> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(names, ["direct", "indexed", "decomposition"]);
    for r in &rows {
        assert_eq!(r[2], "6");
        assert_eq!(r[3], "0");
    }
}

#[test]
fn exponents_at_one_half() {
    let text = stdout(&mtl(&["goldbach", "exponents", "--sigma", "1/2"]));
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..3], ["1/2", "3/4", "7/8"]);
}

#[test]
fn quick_selftest_exits_zero() {
    let o = mtl(&["selftest", "--quick"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 8);
    assert!(text.lines().skip(1).all(|l| l.contains(",true,")));
}

#[test]
fn exit_codes_follow_error_category() {
    let code = |args: &[&str]| mtl(args).status.code().unwrap();
    assert_eq!(code(&[]), 2);
    assert_eq!(code(&["sum", "--builtin", "nope"]), 2);
    assert_eq!(code(&["goldbach", "exponents", "--sigma", "1"]), 2);
    assert_eq!(code(&["--bogus"]), 2);
    assert_eq!(
        code(&["--max-iterations", "100", "sum", "--builtin", "plain_ternary", "--n", "100", "--strategy", "direct"]),
        3
    );
    assert_eq!(code(&["exp", "bracket", "--n", "5", "--poly", "floor(sqrt(2)*sqrt(2)*n)"]), 4);
}

#[test]
fn manifest_written_on_success_and_failure() {
    let dir = tempfile::tempdir().unwrap();
    let ok = dir.path().join("ok.csv");
    let o = mtl(&["--seed", "9", "--out", ok.to_str().unwrap(), "goldbach", "series", "--m", "4,7"]);
    assert!(o.status.success());
    let m = manifest(&ok);
    assert_eq!(m["status"], "ok");
    assert_eq!(m["seed"], 9);
    assert_eq!(m["rows"], 2);
    assert!(m["version"].is_string());
    assert!(m["total_seconds"].as_f64().unwrap() >= 0.0);
    let csv = std::fs::read_to_string(&ok).unwrap();
    assert!(csv.starts_with("m,singular_series,cutoff,tail\n"));
    assert!(csv.contains("\n7,0.0000000000000000e0,"));

    let bad = dir.path().join("bad.csv");
    let o = mtl(&["--out", bad.to_str().unwrap(), "app", "beatty", "--x", "10", "--alpha", "n"]);
    assert_eq!(o.status.code(), Some(2));
    let m = manifest(&bad);
    assert_eq!(m["status"], "error");
    assert_eq!(m["error"]["category"], "config");

    let unresolved = dir.path().join("none.csv");
    let o = mtl(&["--out", unresolved.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(manifest(&unresolved)["error"]["category"], "config");
}

#[test]
fn csv_is_byte_identical_across_runs_and_threads() {
    let cases: [&[&str]; 4] = [
        &["--seed", "3", "sum", "--random", "40", "--strategy", "all"],
        &["sum", "--builtin", "small_var", "--n", "300", "--h", "40", "--strategy", "scan", "--m-lo", "290", "--m-hi", "300"],
        &["goldbach", "r1", "--x", "3000", "--method", "fft"],
        &["exp", "scan", "--n", "2000,4000", "--grid", "1024"],
    ];
    for args in cases {
        let runs: Vec<String> = ["1", "3", "1"]
            .iter()
            .map(|t| {
                let mut a = vec!["--threads", t];
                a.extend_from_slice(args);
                stdout(&mtl(&a))
            })
            .collect();
        assert_eq!(runs[0], runs[1], "{args:?}");
        assert_eq!(runs[0], runs[2], "{args:?}");
    }
}

#[test]
fn config_file_runs_a_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cfg.json");
    let cfg = dir.path().join("run.json");
    let doc = serde_json::json!({
        "command": "sum",
        "params": {"builtin": "plain_ternary", "n": 5, "m": 5, "strategy": "direct"},
        "budgets": {"max_iterations": 1000000, "max_memory_bytes": 1000000000},
        "output": {"path": out, "format": "json"},
        "seed": 11,
        "threads": 2
    });
    std::fs::write(&cfg, doc.to_string()).unwrap();
    let o = mtl(&["--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["seed"], 11);
    assert_eq!(v["results"][0]["value"], -3);
    let m = manifest(&out);
    assert_eq!(m["threads"], 2);
    assert_eq!(m["budgets"]["max_iterations"], 1000000);

    std::fs::write(&cfg, r#"{"command": "sum", "budgets": {"max_iterations": 0}}"#).unwrap();
    assert_eq!(mtl(&["--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&cfg, r#"{"command": "goldbach exponents", "params": {"sigma": ["1/2", "3/5"]}}"#)
        .unwrap();
    let text = stdout(&mtl(&["--config", cfg.to_str().unwrap()]));
    assert!(text.contains("\n3/5,4/5,9/10,"));
}

#[test]
fn environment_overrides_apply() {
    let o = Command::new(env!("CARGO_BIN_EXE_mtl"))
        .args(["goldbach", "exponents", "--sigma", "4/7"])
        .env("MTL_FORMAT", "json")
        .env("MTL_SEED", "5")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&stdout(&o).into_bytes()).unwrap();
    assert_eq!(v["seed"], 5);
    assert_eq!(v["results"][0]["c"], "9/10");
}

#[test]
fn sieve_table_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let plain = stdout(&mtl(&["sieve", "--lo", "90", "--hi", "120"]));
    let cached = stdout(&mtl(&["--sieve-cache", cache.to_str().unwrap(), "sieve", "--lo", "90", "--hi", "120"]));
    let again = stdout(&mtl(&["--sieve-cache", cache.to_str().unwrap(), "sieve", "--lo", "90", "--hi", "120"]));
    assert_eq!(plain, cached);
    assert_eq!(plain, again);
    assert!(std::fs::read_dir(&cache).unwrap().count() == 1);
    assert!(plain.contains("\n97,-1,2,97,1\n"));
    let s = stdout(&mtl(&["sieve", "--hi", "1000", "--summary"]));
    assert_eq!(s, "lo,hi,mu_sum,prime_count\n1,1000,2,168\n");
}

#[test]
fn app_and_fit_commands() {
    let text = stdout(&mtl(&["app", "small_var", "--n", "6", "--h", "1"]));
    assert!(text.lines().nth(1).unwrap().contains(",indexed,6,2,0,"));
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    std::fs::write(&pts, "N,value\n1e4,320.9\n1e5,904.5\n1e6,2668\n").unwrap();
    let fit = stdout(&mtl(&["exp", "fit", "--input", pts.to_str().unwrap()]));
    let row: Vec<&str> = fit.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "log_power");
    assert!(row[2].parse::<f64>().unwrap() > 0.0);
}
