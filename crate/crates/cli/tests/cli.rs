use std::process::{Command, Output};

use serde_json::Value;

fn weylgap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weylgap")).args(args).output().expect("binary runs")
}

fn weylgap_with_workers(args: &[&str], workers: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weylgap"))
        .args(args)
        .env("WEYLGAP_WORKERS", workers)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad json ({e}): {}", String::from_utf8_lossy(&out.stdout));
    })
}

fn without_meta(out: &Output) -> String {
    let mut v = json(out);
    weylgap::report::strip_meta(&mut v);
    serde_json::to_string(&v).unwrap()
}

const EPS4: &[&str] = &["epsilon", "--n", "4", "--starts", "16", "--samples", "20000", "--seed", "7"];

#[test]
fn epsilon_report_contract() {
    let out = weylgap(EPS4);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["schema_version"], "1.0.0");
    assert!(v["meta"]["wall_time_s"].is_number());
    assert_eq!(v["config"]["seed"], 7);
    let eps = v["result"]["epsilon_hat"].as_f64().unwrap();
    assert!(eps > 0.0 && eps <= 64.0 / 3.0 + 1e-9);
    assert_eq!(v["result"]["violations"], 0);
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn identical_seeds_give_identical_reports() {
    let a = weylgap_with_workers(EPS4, "1");
    let b = weylgap_with_workers(EPS4, "3");
    assert_eq!(without_meta(&a), without_meta(&b));
    let args = ["morse", "--spec", "tube:R=2,r=1,n=2", "--directions", "300", "--seed", "3"];
    assert_eq!(without_meta(&weylgap_with_workers(&args, "1")), without_meta(&weylgap_with_workers(&args, "2")));
}

#[test]
fn model_reads_a_report_or_a_bare_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("eps4.json");
    let out = weylgap(&[EPS4, &["--output", report_path.to_str().unwrap()]].concat());
    assert_eq!(out.status.code(), Some(0));
    let bare_path = dir.path().join("bare.json");
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    std::fs::write(&bare_path, report["result"].to_string()).unwrap();

    for path in [&report_path, &bare_path] {
        let out = weylgap(&["model", "--spec", "S1(1)xS1(1)xS2(r=10)", "--epsilon-file", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let v = json(&out);
        let main = &v["result"]["obstructions"][0];
        assert_eq!(main["theorem"], "MAIN");
        assert_eq!(main["verdict"], "VIOLATES_W1");
        assert_eq!(v["result"]["coefficients_disagree"], true);
    }

    let out = weylgap(&["model", "--spec", "S2xS3", "--epsilon-file", report_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "dimension mismatch must be rejected");
}

#[test]
fn morse_csv_table() {
    let out = weylgap(&["morse", "--spec", "tube:R=2,r=1,n=2", "--directions", "2000", "--seed", "3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("index,tau_direction,stderr_direction,tau_normal_bundle"));
    assert!(lines[2].starts_with("1,2,0,"));
}

#[test]
fn exit_codes() {
    assert_eq!(weylgap(&["bogus"]).status.code(), Some(1));
    assert_eq!(weylgap(&["model", "--spec", "Q3(1)"]).status.code(), Some(1));
    assert_eq!(weylgap(&["morse", "--spec", "cone:1"]).status.code(), Some(1));
    assert_eq!(weylgap(&["epsilon", "--n", "3"]).status.code(), Some(1));
    assert_eq!(weylgap(&["constants", "--n", "4", "--epsilon-hat", "1", "--format", "csv"]).status.code(), Some(1));
    assert_eq!(weylgap(&["--help"]).status.code(), Some(0));

    // An epsilon far above the true minimum must be caught by the sampler.
    let out = weylgap(&["gapcheck", "--n", "4", "--epsilon-hat", "1000", "--samples", "5000"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["violations"][0]["property"], "gap_inequality");
    assert!(v["violations"][0]["count"].as_u64().unwrap() > 0);
}

#[test]
fn gapcheck_along_a_hypersurface() {
    let out = weylgap(&[
        "gapcheck",
        "--spec",
        "rgraph:eps=0.3,P=quadric:1,-1,1,-1,0",
        "--epsilon-hat",
        "21.3333",
        "--samples",
        "4000",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!(v["result"]["pointwise"]["middle_index_points"].as_u64().unwrap() > 0);
    assert_eq!(v["result"]["pointwise"]["violations"], 0);
}

#[test]
fn identities_sweep_flags_the_printed_coefficients() {
    let out = weylgap(&["identities", "--dims", "4,6", "--samples", "300", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let rows = v["result"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert_eq!(r["coefficients_disagree"], true);
        assert_eq!(r["inric_violations"], 0);
    }
    let csv = weylgap(&["identities", "--dims", "4", "--samples", "100", "--format", "csv"]);
    assert_eq!(String::from_utf8(csv.stdout).unwrap().lines().count(), 2);
}
