//! End-to-end checks of the binary: spec'd example invocations, output
//! determinism, config-file precedence, and exit codes.

use std::io::Write;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nearcurve"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8")
}

#[test]
fn count_hand_anchor() {
    let out = stdout(&["count", "--f", "x^2", "--J", "0:0.5", "--Q", "1", "--delta", "0.5"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["n"], 1);
    assert_eq!(v["config"]["mode-resolved"], "exact");
}

#[test]
fn constants_unit_window() {
    let out = stdout(&["constants", "--c1", "1", "--c2", "1"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["paper"]["e_hat"], 23328.0);
    let c1_big = v["paper"]["C1"].as_f64().unwrap();
    let c2_big = v["paper"]["C2"].as_f64().unwrap();
    let c0 = v["paper"]["c0"].as_f64().unwrap();
    assert!((c2_big.powi(3) * 2.0 * c0 - c1_big).abs() <= 1e-9 * c1_big);
}

#[test]
fn csv_bodies_are_byte_identical_across_runs() {
    let args = [
        "good", "--f", "x^2", "--J", "-1:1", "--C", "6.93", "--alpha", "0.5", "--balls", "5",
        "--seed", "42",
    ];
    let a = stdout(&args);
    let b = stdout(&args);
    assert_eq!(a, b);
    assert!(a.lines().any(|l| l == "# seed=42"));
}

#[test]
fn attach_csv_deterministic() {
    let args = [
        "attach", "--f", "x^2", "--J", "0:0.5", "--Q", "100", "--delta", "0.5", "--constants",
        "relaxed:c0=0.1", "--grid", "50",
    ];
    assert_eq!(stdout(&args), stdout(&args));
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "# defaults for the parabola runs").unwrap();
    writeln!(f, "f=x^2").unwrap();
    writeln!(f, "J=0:0.5").unwrap();
    writeln!(f, "Q=1").unwrap();
    writeln!(f, "delta=0.5").unwrap();
    drop(f);
    let conf = path.to_str().unwrap();

    // everything from the file
    let out = stdout(&["count", "--config", conf]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["n"], 1);

    // flag overrides file: a tiny delta empties the count
    let out = stdout(&["count", "--config", conf, "--delta", "1/1000"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["n"], 1, "q=1,p1=0,p2=0 is exactly on the curve");
    assert_eq!(v["config"]["delta"], "1/1000");

    let out = stdout(&["count", "--config", conf, "--J", "0.1:0.4"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["n"], 0, "no q=1 point has p1/q inside [0.1, 0.4]");
}

#[test]
fn mollify_emits_requested_grid() {
    let out = stdout(&[
        "mollify", "--f", "x^2", "--J", "-1:1", "--epsilon", "0.01", "--grid", "10",
    ]);
    let data_rows: Vec<&str> = out
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('x'))
        .collect();
    assert_eq!(data_rows.len(), 11);
    // interior curvature sits in the preserved window
    let mid: Vec<&str> = data_rows[5].split(',').collect();
    let d2: f64 = mid[3].parse().unwrap();
    assert!((d2 - 2.0).abs() < 0.01, "{d2}");
}

#[test]
fn pathological_breakpoints_sorted_and_injective() {
    let out = stdout(&["pathological", "--N", "64", "--dump", "breakpoints"]);
    let mut prev = f64::NEG_INFINITY;
    let mut count = 0;
    for line in out.lines().filter(|l| !l.starts_with('#') && !l.starts_with("index")) {
        let pos: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(pos > prev, "breakpoints out of order");
        prev = pos;
        count += 1;
    }
    assert_eq!(count, 64);
}

#[test]
fn pathological_curve_feeds_counting() {
    let args = [
        "count", "--pathological", "0:1:100", "--J", "0.1:0.9", "--Q", "40", "--delta", "1/4",
    ];
    let out = stdout(&args);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["config"]["mode-resolved"], "exact");
    assert!(v["n"].as_u64().unwrap() > 0);
    assert_eq!(stdout(&args), out);
}

#[test]
fn exit_codes() {
    // validation: bad expression
    let out = run(&["count", "--f", "x^^2", "--J", "0:1", "--Q", "5", "--delta", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    // validation: exact mode without rational evaluation
    let out = run(&[
        "count", "--f", "exp(x)", "--J", "0:1", "--Q", "5", "--delta", "0.5", "--mode", "exact",
    ]);
    assert_eq!(out.status.code(), Some(1));
    // guard: the coefficient search width blows past the cap
    let out = run(&[
        "bg", "--f", "x^2", "--J", "0:1", "--delta", "0.5", "--K", "1e9", "--T", "2", "--grid",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    // missing required option
    let out = run(&["count", "--f", "x^2", "--J", "0:1", "--Q", "5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bg_reports_verdict() {
    let out = stdout(&[
        "bg", "--f", "x^2", "--J", "0:1", "--delta", "0.2", "--K", "0.5", "--T", "4", "--grid",
        "200", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let frac = v["estimate"]["fraction"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&frac));
    assert!(v["verdict"]["status"].is_string());
}

#[test]
fn verify_composes_count_oracle_and_verdicts() {
    let out = stdout(&["verify", "--f", "x^2", "--J", "0:1", "--Q", "40", "--delta", "0.25"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["oracle"]["ran"], true);
    assert_eq!(v["oracle"]["matches"], true);
    assert_eq!(v["closure_margin"]["ran"], true);
    assert!(v["closure_margin"]["eps_star"].as_f64().unwrap() > 0.0);
    assert_eq!(v["thm1"]["all_pass"], false, "paper constants are astronomical");
}
