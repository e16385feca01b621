use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn dnls(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dnls")).args(args).output().expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn scatter_black_soliton_reports_one_zero_at_quarter_turn() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = dnls(&["scatter", "--potential", "black-soliton", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a = json(&out.join("a.json"));
    let zeros = a["zeros"].as_array().unwrap();
    assert_eq!(zeros.len(), 1);
    let theta = zeros[0]["theta"].as_f64().unwrap();
    assert!((theta - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    let c = zeros[0]["norming"]["c"]["re"].as_f64().unwrap();
    assert!((c + 2.0).abs() < 1e-8, "{c}");
    for f in ["scattering.json", "coefficients.csv", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["config"]["potential"]["builtin"]["kind"], "black-soliton");
    assert_eq!(m["config"]["spectral"]["z_nodes"], 800);
}

#[test]
fn synthesize_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<_> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let o = dnls(&["synthesize", "--poles", "pi/3,2pi/3", "--t", "10", "--out", out.to_str().unwrap()]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            out
        })
        .collect();
    for f in ["q.csv", "spectrum.json"] {
        assert_eq!(fs::read(runs[0].join(f)).unwrap(), fs::read(runs[1].join(f)).unwrap(), "{f}");
    }
    let text = fs::read_to_string(runs[0].join("q.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,re,im,abs2"));
    assert_eq!(lines.count(), 2048);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{
            "potential": {"builtin": {"kind": "nsoliton",
                "spec": {"thetas": [1.0471975511965976], "c": {"re": [-1.5155444566227676], "im": [0.875]}}}},
            "grid": {"L": 20, "n": 512},
            "t": 3.0
        }"#,
    )
    .unwrap();
    let out = dir.path().join("run");
    let o = dnls(&["synthesize", "--config", cfg.to_str().unwrap(), "--t", "4", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["config"]["t"], 4.0);
    assert_eq!(m["config"]["grid"]["n"], 512);
    let s = json(&out.join("spectrum.json"));
    assert_eq!(s["t"], 4.0);
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let o = dnls(&["scatter", "--potential", "no-such-thing", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = dnls(&["scatter", "--config", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"grid": {"L": 20}, "colour": "red"}"#).unwrap();
    let o = dnls(&["scatter", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
    let o = dnls(&["synthesize", "--poles", "pi/3", "--grid-n", "1000", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = dnls(&["evolve", "--samples", dir.path().join("none.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = dnls(&["bogus-verb"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn experiment_exit_status_follows_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ok");
    let o = dnls(&["experiment", "appendix-c", "--eps", "0.02", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&out.join("report.json"));
    assert_eq!(r["pass"], true);
    assert!(r.get("runtime").is_none());
    assert!(out.join("report.csv").exists());
    // ε = 0 leaves nothing to scale: the ratio test cannot pass
    let out = dir.path().join("zero");
    let o = dnls(&["experiment", "appendix-c", "--eps", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn samples_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let synth = dir.path().join("s");
    let o =
        dnls(&["synthesize", "--poles", "pi/2", "--moduli", "2", "--grid-n", "1024", "--out", synth.to_str().unwrap()]);
    assert!(o.status.success());
    let out = dir.path().join("e");
    let o = dnls(&[
        "evolve",
        "--samples",
        synth.join("q.csv").to_str().unwrap(),
        "--t",
        "0.5",
        "--snapshot-every",
        "0.25",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // the black soliton does not move
    let last = fs::read_to_string(out.join("q_0002.csv")).unwrap();
    let first = fs::read_to_string(synth.join("q.csv")).unwrap();
    for (a, b) in last.lines().zip(first.lines()).skip(1) {
        let pa: Vec<f64> = a.split(',').map(|v| v.parse().unwrap()).collect();
        let pb: Vec<f64> = b.split(',').map(|v| v.parse().unwrap()).collect();
        assert!((pa[1] - pb[1]).abs() < 1e-10 && (pa[2] - pb[2]).abs() < 1e-10);
    }
}

#[test]
fn rejected_runs_leave_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let o =
        dnls(&["evolve", "--samples", dir.path().join("none.csv").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}
