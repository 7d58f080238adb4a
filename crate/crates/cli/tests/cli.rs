use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn soskp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_soskp"))
        .args(args)
        .env_remove("SOSKP_PRECISION_BITS")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn csv_body(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn rank_two_point_instance() {
    let out = soskp(&["rank", "--n", "2", "--q", "1/2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["report"]["rank"], 2);
    assert_eq!(v["report"]["convention"], "paper-dual-side");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config"]["q"], "1/2");
    assert!(String::from_utf8_lossy(&out.stderr).contains("rank 2"));
}

#[test]
fn construct_then_verify_then_tamper() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("c.json");
    let out = soskp(&["construct", "--n", "100", "--q", "1/2", "--out", cert.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = soskp(&["verify", cert.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["report"]["pass"], true);

    let text = std::fs::read_to_string(&cert).unwrap();
    let start = text.find("\"sigma1\"").unwrap();
    let at = start + text[start..].find(|c: char| c.is_ascii_digit() && c != '0').unwrap();
    let mut bytes = text.into_bytes();
    bytes[at] = if bytes[at] == b'7' { b'8' } else { b'7' };
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, bytes).unwrap();
    assert_eq!(soskp(&["verify", bad.to_str().unwrap()]).status.code(), Some(1));

    std::fs::write(&bad, b"{ truncated").unwrap();
    assert_eq!(soskp(&["verify", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn upper_regime_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("u.json");
    let out = soskp(&["construct", "--n", "12", "--q", "23/2", "-o", cert.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(soskp(&["verify", cert.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn malformed_q_is_usage_error() {
    let out = soskp(&["rank", "--n", "3", "--q", "1/x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("expected"));
    assert_eq!(soskp(&["rank", "--q", "1/2"]).status.code(), Some(2));
    assert_eq!(soskp(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn trivial_instance_rank_zero() {
    for q in ["2", "-1/2", "9/2"] {
        let out = soskp(&["rank", "--n", "4", "--q", q]);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(json_of(&out)["report"]["rank"], 0, "q={q}");
    }
}

#[test]
fn precision_env_var() {
    let out = Command::new(env!("CARGO_BIN_EXE_soskp"))
        .args(["bounds", "--n", "10", "--q", "7/2"])
        .env("SOSKP_PRECISION_BITS", "384")
        .output()
        .unwrap();
    assert_eq!(json_of(&out)["config"]["precision_bits"], 384);
    let out = Command::new(env!("CARGO_BIN_EXE_soskp"))
        .args(["bounds", "--n", "10", "--q", "7/2"])
        .env("SOSKP_PRECISION_BITS", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

fn rerun_from_header(out_path: &Path, dir: &Path) -> String {
    let text = std::fs::read_to_string(out_path).unwrap();
    let line = text.lines().find(|l| l.starts_with("# config ")).unwrap();
    let cfg_path = dir.join("cfg.json");
    std::fs::write(&cfg_path, &line["# config ".len()..]).unwrap();
    let out = soskp(&["--config", cfg_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::read_to_string(out_path).unwrap()
}

#[test]
fn config_rerun_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let out = soskp(&[
        "smooth", "--n", "100", "--q", "3/2", "--sigma", "0.05", "--samples", "500", "--seed", "9",
        "-o", path.to_str().unwrap(), "--jobs", "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let first = std::fs::read_to_string(&path).unwrap();
    assert_eq!(csv_body(&first).len(), 500);
    let second = rerun_from_header(&path, dir.path());
    assert_eq!(first, second);
}

#[test]
fn sweep_degree_monotone_in_e() {
    let out = soskp(&["sweep", "--n", "40", "--q-floor", "2", "--e-min", "1", "--e-max", "30"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_body(&String::from_utf8_lossy(&out.stdout));
    assert_eq!(rows.len(), 30);
    let vals: Vec<u32> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[0] <= w[1]), "{vals:?}");
    assert!(vals[29] > vals[0]);
}

#[test]
fn check_ij_and_bounds() {
    let out = soskp(&["check-ij", "--n", "50", "--q", "5/2", "--sigma", "0.3"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_body(&String::from_utf8_lossy(&out.stdout));
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| r[6].parse::<f64>().unwrap() > 0.0));

    let out = soskp(&["bounds", "--n", "100", "--q", "50.5"]);
    let v = json_of(&out);
    assert_eq!(v["shapes"]["baseline"], 50.0);
    assert_eq!(v["shapes"]["label"], "shape, unit constants");
}

#[test]
fn rank_csv_carries_convention() {
    let out = soskp(&["rank", "--n", "3", "--q", "3/2", "--format", "csv", "--method", "dense"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("# convention paper-dual-side"));
    assert!(text.contains("d,status,margin"));
}
