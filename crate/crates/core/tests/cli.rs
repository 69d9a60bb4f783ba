//! End-to-end runs of the `covkg` binary plus config parsing.

use covkg::cli::{RunConfig, StateChoice, Suite, ToleranceMode};
use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn covkg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covkg")).args(args).output().expect("binary runs")
}

fn config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn untimed(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timings");
    v
}

const SMALL: &str = "grid.n_x = 64\ntolerance.mode = explicit\nsuites = functor, timeslice\n";

#[test]
fn verify_is_deterministic_and_exits_zero() {
    let d = tempfile::tempdir().unwrap();
    let cfg = config(d.path(), "small.cfg", SMALL);
    let a = d.path().join("a.json");
    let b = d.path().join("b.json");
    let out = covkg(&["verify", "--config", &cfg, "--json", a.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(covkg(&["verify", "--config", &cfg, "--json", b.to_str().unwrap()]).status.success());
    let (ja, jb) = (json(&a), json(&b));
    assert_eq!(ja["pass"], Value::Bool(true));
    assert!(!ja["records"].as_array().unwrap().is_empty());
    assert_eq!(untimed(ja), untimed(jb));
}

#[test]
fn report_echoes_config_and_anchors() {
    let d = tempfile::tempdir().unwrap();
    let cfg = config(d.path(), "small.cfg", SMALL);
    let p = d.path().join("r.json");
    assert!(covkg(&["verify", "--config", &cfg, "--json", p.to_str().unwrap()]).status.success());
    let j = json(&p);
    assert_eq!(j["config"]["grid.n_x"], "64");
    assert!(j["config"]["weyl.convention"].is_string());
    for r in j["records"].as_array().unwrap() {
        assert!(!r["anchor"].as_str().unwrap().is_empty());
        assert!(r["tolerance"].is_number() || r["tolerance"].is_null());
    }
}

#[test]
fn tight_scale_fails_with_nonzero_exit_and_names_records() {
    let d = tempfile::tempdir().unwrap();
    let cfg = config(d.path(), "tight.cfg", "grid.n_x = 64\ntolerance.mode = explicit\ntolerance.scale = 1e-6\nsuites = states\n");
    let out = covkg(&["verify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("failed:"), "{text}");
    assert!(text.contains("FAIL"));
}

#[test]
fn empty_suite_list_gives_a_valid_passing_report() {
    let d = tempfile::tempdir().unwrap();
    let cfg = config(d.path(), "empty.cfg", "suites =\n");
    let p = d.path().join("e.json");
    let out = covkg(&["verify", "--config", &cfg, "--json", p.to_str().unwrap()]);
    assert!(out.status.success());
    let j = json(&p);
    assert_eq!(j["records"].as_array().unwrap().len(), 0);
    assert_eq!(j["pass"], Value::Bool(true));
}

#[test]
fn config_errors_exit_with_two() {
    let d = tempfile::tempdir().unwrap();
    let typo = config(d.path(), "typo.cfg", "grid.nx = 64\n");
    let out = covkg(&["verify", "--config", &typo]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.nx"));
    let region = config(d.path(), "region.cfg", "causality.pair = left nowhere\n");
    assert_eq!(covkg(&["verify", "--config", &region]).status.code(), Some(2));
    assert_eq!(covkg(&["verify", "no-such-suite"]).status.code(), Some(2));
}

#[test]
fn rce_rejects_foreign_suites() {
    assert_eq!(covkg(&["rce", "--suite", "states"]).status.code(), Some(2));
}

#[test]
fn plotdata_headers_and_byte_identical_reruns() {
    let d = tempfile::tempdir().unwrap();
    let cfg = config(d.path(), "p.cfg", "grid.n_x = 256\n");
    let (a, b) = (d.path().join("a"), d.path().join("b"));
    for dir in [&a, &b] {
        let out = covkg(&["plotdata", "--config", &cfg, "--csv-dir", dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert!(names.iter().any(|n| n == "stress_integrand.csv"));
    assert!(names.iter().any(|n| n.starts_with("fg_probe")));
    assert!(names.iter().any(|n| n.starts_with("wick_")));
    for n in &names {
        let x = fs::read(a.join(n)).unwrap();
        assert_eq!(x, fs::read(b.join(n)).unwrap(), "{n} differs between runs");
    }
    let head = |n: &str| fs::read_to_string(a.join(n)).unwrap().lines().next().unwrap().to_string();
    assert_eq!(head("stress_integrand.csv"), "t,x,value");
    assert_eq!(head("fg_probe0.csv"), "x,phi,pi,fg_phi,fg_pi");
}

#[test]
fn dump_fields_writes_grid_csv() {
    let d = tempfile::tempdir().unwrap();
    let cfg = config(d.path(), "small.cfg", SMALL);
    let dump = d.path().join("fields");
    assert!(covkg(&["verify", "--config", &cfg, "--dump-fields", dump.to_str().unwrap()]).status.success());
    let text = fs::read_to_string(dump.join("timeslice_ef.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("t,x,"));
    assert_eq!(lines.count(), 64 * 128);
}

#[test]
fn wick_subcommand_vacuum_and_thermal() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().join("w.json");
    let out = covkg(&["wick", "--state", "thermal:1.0", "--mu", "1.5", "--json", p.to_str().unwrap(), "--csv-dir", d.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(!json(&p)["records"].as_array().unwrap().is_empty());
    assert_eq!(covkg(&["wick", "--state", "warm"]).status.code(), Some(2));
}

#[test]
fn defaults_parse_and_overlay() {
    let c = RunConfig::default();
    assert_eq!(c.suites, Suite::ALL.to_vec());
    assert_eq!(c.tolerances.mode, ToleranceMode::Auto);
    assert!((c.length - std::f64::consts::TAU).abs() < 1e-15);
    let c = RunConfig::parse("# comment\ngrid.n_x = 128   # trailing\n").unwrap();
    assert_eq!((c.n_x, c.n_t), (128, 256));
    let c = RunConfig::parse("grid.n_x = 128\ngrid.n_t = 300\n").unwrap();
    assert_eq!(c.n_t, 300);
}

#[test]
fn suite_names_and_aliases() {
    for s in Suite::ALL {
        assert_eq!(s.name().parse::<Suite>().unwrap(), s);
    }
    assert_eq!("bu".parse::<Suite>().unwrap(), Suite::BuField);
    assert_eq!("triple".parse::<Suite>().unwrap(), Suite::RceTriple);
    assert!("nonsense".parse::<Suite>().is_err());
}

#[test]
fn tolerance_overrides_and_scale() {
    let c = RunConfig::parse("tolerance.scale = 10\ntolerance.causal_commutation = 3e-3\n").unwrap();
    assert_eq!(c.tolerances.resolve("causal commutation", 1e-2), 3e-3);
    assert_eq!(c.tolerances.resolve("time slice deviation", 1e-2), 1e-1);
    assert!(RunConfig::parse("tolerance.scale = 0\n").is_err());
    assert!(RunConfig::parse("tolerance.mode = lenient\n").is_err());
}

#[test]
fn state_choice_parses() {
    assert_eq!("vacuum".parse::<StateChoice>().unwrap(), StateChoice::Vacuum);
    assert_eq!("thermal:2.5".parse::<StateChoice>().unwrap(), StateChoice::Thermal(2.5));
    assert!("thermal:-1".parse::<StateChoice>().is_err());
    assert!("thermal:".parse::<StateChoice>().is_err());
}

#[test]
fn bad_regions_and_values_are_rejected() {
    assert!(RunConfig::parse("region.left = circle 1 2 3\n").is_err());
    assert!(RunConfig::parse("net.region = ghost\n").is_err());
    assert!(RunConfig::parse("wick.mu = 1 -2\n").is_err());
    assert!(RunConfig::parse("rce.family = wobbly\n").is_err());
    assert!(RunConfig::parse("states.probes = 1\n").is_err());
    assert!(RunConfig::parse("grid.n_x = many\n").is_err());
}
