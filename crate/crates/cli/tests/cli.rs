use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde_json::Value;

fn supercong(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_supercong"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json_lines(out: &Output) -> Vec<Value> {
    stdout(out).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn manifest(out: &Output) -> Value {
    let text = stderr(out);
    serde_json::from_str(text.lines().last().expect("manifest line")).unwrap()
}

#[test]
fn verify_examples() {
    let out = supercong(&["verify", "thm1", "--d", "14", "--p", "7", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let rows = json_lines(&out);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["statement"], "THM1");
    assert_eq!(rows[0]["holds"], true);

    assert_eq!(code(&supercong(&["verify", "lehmer2", "--p", "7", "--k", "1"])), 0);
    assert_eq!(code(&supercong(&["verify", "thm1", "--d", "12", "--p", "3"])), 2);
}

#[test]
fn input_errors_exit_2() {
    for args in [
        &["verify", "no-such-statement", "--p", "7"][..],
        &["verify", "thm1", "--p", "7"],
        &["verify", "lehmer2", "--p", "7"],
        &["verify", "thm3", "--p", "5", "--k", "1"],
        &["verify", "thm1", "--d", "10", "--p", "5"],
        &["verify", "cor-exact-div", "--d", "14", "--p", "7"],
        &["scan", "thm1", "--kappa", "1"],
        &["scan"],
        &["bernoulli", "--n", "4", "--disc", "6"],
        &["bernoulli", "--n", "4", "--n-max", "2"],
        &["lfun", "--p", "7", "--d", "15"],
        &["table1", "--jobs", "0"],
        &["frobnicate"],
        &["verify", "thm1", "--d", "x", "--p", "7"],
    ] {
        assert_eq!(code(&supercong(args)), 2, "{args:?}");
    }
    assert_eq!(code(&supercong(&["--help"])), 0);
}

#[test]
fn genuine_counterexample_exits_1() {
    let out = supercong(&["verify", "lehmer2", "--p", "3", "--k", "4"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json_lines(&out)[0]["holds"], false);
    assert_eq!(manifest(&out)["tallies"]["fails"], 1);
}

#[test]
fn detectors_and_advisories_do_not_fail_the_run() {
    let out = supercong(&["verify", "super-wilson", "--p", "13"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_lines(&out)[0]["holds"], false);

    let out = supercong(&["verify", "thm1", "--d", "10", "--p", "5", "--include-p5"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_lines(&out)[0]["advisory"], true);
}

#[test]
fn super_wilson_scan_finds_nothing() {
    let out = supercong(&["scan", "super-wilson", "--p-max", "300"]);
    assert_eq!(code(&out), 0);
    let rows = json_lines(&out);
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r["holds"] == false));
    let m = manifest(&out);
    assert_eq!(m["tallies"]["detector_fails"], rows.len());
    assert!(m.get("attention").is_none());
}

#[test]
fn empty_grid() {
    let out = supercong(&["scan", "thm1", "--d-max", "5"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).is_empty());
    assert_eq!(manifest(&out)["instances"], 0);
}

/// `v_p(num/den)` by repeated division, independent of the library.
fn valuation(x: &str, p: u64) -> Option<i64> {
    let (n, d) = x.split_once('/').unwrap();
    let mut n: BigInt = n.parse().unwrap();
    let mut d: BigInt = d.parse().unwrap();
    if n.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut v = 0;
    while (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    while (&d % &p).is_zero() {
        d /= &p;
        v -= 1;
    }
    Some(v)
}

fn difference(lhs: &str, rhs: &str) -> String {
    let parse = |s: &str| {
        let (n, d) = s.split_once('/').unwrap();
        (n.parse::<BigInt>().unwrap(), d.parse::<BigInt>().unwrap())
    };
    let ((a, b), (c, d)) = (parse(lhs), parse(rhs));
    let num = a * &d - c * &b;
    let den = b * d;
    let den = if den.is_negative() { -den } else { den };
    format!("{num}/{den}")
}

#[test]
fn json_verdicts_rederive_from_the_printed_sides() {
    let out = supercong(&["scan", "thm1", "super-aacm", "chain", "lehmer2", "thm3", "--d-max", "300", "--p-max", "40", "--p-min", "3"]);
    assert_eq!(code(&out), 1, "lehmer2 at (3, 4) fails");
    let rows = json_lines(&out);
    assert!(rows.len() > 100);
    for r in &rows {
        let p = r["instance"]["p"].as_u64().unwrap();
        let depth = r["depth"].as_i64().unwrap();
        let v = valuation(&difference(r["lhs"].as_str().unwrap(), r["rhs"].as_str().unwrap()), p);
        assert_eq!(v, r["difference_valuation"].as_i64(), "{r}");
        assert_eq!(v.is_none_or(|v| v >= depth), r["holds"].as_bool().unwrap(), "{r}");
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["scan", "thm1", "chain", "lehmer-diff", "--d-max", "400", "--p-max", "60", "--format", "csv"];
    let a = supercong(&args);
    let b = supercong(&[&args[..], &["--jobs", "1"]].concat());
    let c = supercong(&[&args[..], &["--jobs", "3"]].concat());
    assert_eq!(code(&a), 0);
    assert!(stdout(&a).lines().count() > 50);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let strip = |mut m: Value| {
        m.as_object_mut().unwrap().remove("wall_time_ms");
        m
    };
    assert_eq!(strip(manifest(&a)), strip(manifest(&b)));
}

#[test]
fn csv_shape() {
    let out = supercong(&["scan", "lehmer2", "--p-min", "7", "--p-max", "11", "--k-max", "2", "--format", "csv"]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "statement,d,p,k,chi,lhs,rhs,depth,difference_valuation,holds,advisory");
    assert_eq!(lines.len(), 1 + 2 * 2);
    assert!(lines[1].starts_with("LEHMER_THM2,,7,1,,"));
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 11));
}

#[test]
fn table1_rows() {
    let out = supercong(&["table1"]);
    assert_eq!(code(&out), 0);
    let rows = json_lines(&out);
    assert_eq!(rows[0]["status"], "match");
    assert_eq!(rows[0]["factorization"], "3*5*273281");
    assert!(rows[1]["status"].as_str().unwrap().starts_with("skipped"));

    let out = supercong(&["table1", "--long-running"]);
    assert_eq!(code(&out), 0);
    let rows = json_lines(&out);
    let got: Vec<(u64, u64)> = rows.iter().map(|r| (r["h"].as_u64().unwrap(), r["vp_u"].as_u64().unwrap())).collect();
    assert_eq!(got, vec![(4, 3), (8, 2), (16, 2)]);
}

#[test]
fn bernoulli_and_lfun_dumps() {
    let out = supercong(&["bernoulli", "--n", "10", "--n-max", "12"]);
    assert_eq!(code(&out), 0);
    let values: Vec<String> = json_lines(&out).iter().map(|r| r["value"].as_str().unwrap().to_string()).collect();
    assert_eq!(values, ["5/66", "0/1", "-691/2730"]);

    let out = supercong(&["bernoulli", "--n", "1", "--disc", "-4"]);
    assert_eq!(json_lines(&out)[0]["value"], "-1/2");

    let out = supercong(&["lfun", "--p", "7", "--d", "14"]);
    assert_eq!(code(&out), 0);
    let row = &json_lines(&out)[0];
    assert_eq!(row["disc"], 56);
    assert_eq!(row["a_minus1"], "0/1");
    assert_eq!(row["a1_agrees"], true);

    let out = supercong(&["lfun", "--p", "13"]);
    let row = &json_lines(&out)[0];
    assert_eq!(row["a_minus1"], "-12/13");
    assert_eq!((row["a0_agrees"].as_bool(), row["a1_agrees"].as_bool()), (Some(true), Some(true)));
}

fn cache_file(dir: &Path) -> std::path::PathBuf {
    dir.join("bernoulli-cache-v1.json")
}

#[test]
fn cache_round_trip_and_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let cache_dir = dir.path().join("cache");
    let cd = cache_dir.to_str().unwrap();
    let first = supercong(&["bernoulli", "--n", "12", "--cache-dir", cd]);
    assert_eq!(code(&first), 0);
    let file = cache_file(&cache_dir);
    let stored: Value = serde_json::from_str(&fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(stored["version"], 1);
    let entries = stored["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 13);
    assert_eq!(entries[12], serde_json::json!({"n": 12, "disc": null, "num": "-691", "den": "2730"}));

    let mut tampered = stored.clone();
    // coprime to 2730, so only the recomputation can catch it
    tampered["entries"][12]["num"] = "-697".into();
    fs::write(&file, tampered.to_string()).unwrap();
    let second = supercong(&["bernoulli", "--n", "12", "--cache-dir", cd]);
    assert_eq!(code(&second), 0);
    assert_eq!(first.stdout, second.stdout);
    assert!(stderr(&second).contains("does not match recomputation"));
    let repaired: Value = serde_json::from_str(&fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(repaired, stored);

    fs::write(&file, r#"{"version": 0, "entries": []}"#).unwrap();
    let third = supercong(&["bernoulli", "--n", "12", "--cache-dir", cd]);
    assert_eq!(first.stdout, third.stdout);
    assert!(stderr(&third).contains("rebuilding"));
}

#[test]
fn cached_scan_matches_fresh_scan() {
    let dir = tempfile::tempdir().unwrap();
    let cd = dir.path().to_str().unwrap();
    let args = ["scan", "thm1", "--d-max", "300", "--p-max", "30"];
    let fresh = supercong(&args);
    let warm = supercong(&[&args[..], &["--cache-dir", cd]].concat());
    let hot = supercong(&[&args[..], &["--cache-dir", cd]].concat());
    assert_eq!(fresh.stdout, warm.stdout);
    assert_eq!(fresh.stdout, hot.stdout);
    assert!(!stderr(&hot).contains("dropping"));
}

#[test]
fn unwritable_cache_dir_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let bad = blocker.join("cache");
    let out = supercong(&["bernoulli", "--n", "4", "--cache-dir", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).is_empty());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "# grid\nd-max = 100\np-max = 13\nformat = csv\n").unwrap();
    let conf = conf.to_str().unwrap();
    let from_file = supercong(&["scan", "thm1", "--config", conf]);
    let explicit = supercong(&["scan", "thm1", "--d-max", "100", "--p-max", "13", "--format", "csv"]);
    assert_eq!(code(&from_file), 0);
    assert_eq!(from_file.stdout, explicit.stdout);

    let overridden = supercong(&["scan", "thm1", "--config", conf, "--p-max", "7", "--format", "json"]);
    let rows = json_lines(&overridden);
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r["instance"]["p"] == 7));
    assert_eq!(manifest(&overridden)["config"]["p_max"], 7);

    assert_eq!(code(&supercong(&["scan", "thm1", "--config", "/nonexistent.conf"])), 2);
}

#[test]
fn manifest_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("manifest.json");
    let out = supercong(&["scan", "lehmer2", "lehmer-diff", "--p-min", "3", "--p-max", "50", "--manifest", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1, "(3, 4) is a counterexample to the printed statement");
    let m: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let tallies = m["tallies"].as_object().unwrap();
    let total: u64 = tallies.values().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(total, m["instances"].as_u64().unwrap());
    assert_eq!(m["tallies"]["fails"], 1);
    assert_eq!(m["command"], "scan");
    assert_eq!(m["exit_code"], 1);
}
