use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_recoil-sigma"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(format!("{name}.schema.json"));
    let text = std::fs::read_to_string(&path).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Runs a JSON-producing subcommand, checks exit 0 and validates against its schema.
fn json_ok(kind: &str, args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let validator = schema(kind);
    if let Err(e) = validator.validate(&v) {
        panic!("{kind} output violates schema: {e}\n{v:#}");
    }
    v
}

fn error_json(out: &Output, code: i32) -> Value {
    assert_eq!(out.status.code(), Some(code), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(schema("error").is_valid(&v), "{v}");
    v
}

#[test]
fn dmin_reports_first_minimum() {
    let cfg = fixture("c70_reference.cfg");
    let v = json_ok("dmin", &["dmin", "--config", path_str(&cfg)]);
    let d = v["result"]["first_minimum_distance_m"].as_f64().unwrap();
    assert!((d / 0.0313 - 1.0).abs() < 0.01);
    let rev = v["result"]["revival_period_m"].as_f64().unwrap();
    assert_eq!(rev, 2.0 * d);
    assert_eq!(v["manifest"]["config_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn quick_sigma_unit_ratio_is_zero_and_warns() {
    let cfg = fixture("c70_reference.cfg");
    let v = json_ok(
        "quick-sigma",
        &["quick-sigma", "--config", path_str(&cfg), "--ratio", "1.0", "--distance", "0.0313"],
    );
    assert_eq!(v["result"]["sigma_abs_m2"].as_f64(), Some(0.0));
    assert!(!v["result"]["bias_warning"].as_str().unwrap().is_empty());
}

#[test]
fn fit_sigma_on_fixture_curve() {
    let v = json_ok(
        "fit-sigma",
        &[
            "fit-sigma",
            "--config",
            path_str(&fixture("c70_reference.cfg")),
            "--data",
            path_str(&fixture("c70_distance_scan.csv")),
        ],
    );
    let r = &v["result"];
    let sigma = r["sigma_abs_m2"].as_f64().unwrap();
    let err = r["stat_err_lo_m2"].as_f64().unwrap().max(r["stat_err_hi_m2"].as_f64().unwrap());
    assert!((sigma - 1.97e-21).abs() < 3.0 * err, "{sigma} ± {err}");
    assert!(!r["fit_trace"].as_array().unwrap().is_empty());
}

#[test]
fn auxiliary_fits_validate() {
    json_ok(
        "offset-scan",
        &[
            "offset-scan",
            "--config",
            path_str(&fixture("c70_offset_scan.cfg")),
            "--data",
            path_str(&fixture("c70_offsets.csv")),
            "--free-waist",
        ],
    );
    let v = json_ok(
        "power-scan",
        &[
            "power-scan",
            "--config",
            path_str(&fixture("c70_power_scan.cfg")),
            "--data",
            path_str(&fixture("c70_powers.csv")),
        ],
    );
    assert_eq!(v["result"]["points_used"], 7);
    let v = json_ok("constancy", &["constancy", "--data", path_str(&fixture("c70_constancy.csv"))]);
    assert!(v["manifest"]["config_digest"].is_null());
    assert_eq!(v["result"]["consistent"], true);
}

#[test]
fn simulate_then_extract_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("c70_reference.cfg");
    let scan = dir.path().join("scan.csv");
    let out = run(&[
        "simulate",
        "scan",
        "--config",
        path_str(&cfg),
        "--sigma",
        "1.97e-21",
        "--seed",
        "5",
        "-o",
        path_str(&scan),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&scan).unwrap();
    assert!(text.starts_with("position_m,counts,dwell_s\n"));
    let sidecar: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("scan.csv.manifest.json")).unwrap()).unwrap();
    assert!(schema("simulate-scan.manifest").is_valid(&sidecar));
    assert_eq!(sidecar["manifest"]["seed"], 5);

    let v = json_ok(
        "extract-visibility",
        &["extract-visibility", "--config", path_str(&cfg), "--scan", path_str(&scan)],
    );
    let vis = v["result"]["visibility"].as_f64().unwrap();
    let err = v["result"]["visibility_err"].as_f64().unwrap();
    assert!((vis - 0.15).abs() < 4.0 * err);

    let curve = dir.path().join("curve.csv");
    let out = run(&[
        "simulate",
        "curve",
        "--config",
        path_str(&cfg),
        "--sigma",
        "1.97e-21",
        "--seed",
        "9",
        "--noise",
        "gaussian",
        "-o",
        path_str(&curve),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_ok(
        "fit-sigma",
        &["fit-sigma", "--config", path_str(&cfg), "--data", path_str(&curve)],
    );
    let r = &v["result"];
    let sigma = r["sigma_abs_m2"].as_f64().unwrap();
    let err = r["stat_err_lo_m2"].as_f64().unwrap().max(r["stat_err_hi_m2"].as_f64().unwrap());
    assert!((sigma - 1.97e-21).abs() < 3.0 * err, "{sigma} ± {err}");
}

#[test]
fn simulated_files_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("c70_reference.cfg");
    let make = |name: &str| {
        let p = dir.path().join(name);
        let out = run(&[
            "simulate",
            "curve",
            "--config",
            path_str(&cfg),
            "--sigma",
            "1.97e-21",
            "--seed",
            "21",
            "--points",
            "3",
            "--repeats",
            "3",
            "--molecules",
            "5000",
            "-o",
            path_str(&p),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(p).unwrap()
    };
    assert_eq!(make("a.csv"), make("b.csv"));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("c70_reference.cfg");
    let make = |threads: &str, name: &str| {
        let p = dir.path().join(name);
        let out = bin()
            .env("RECOIL_SIGMA_THREADS", threads)
            .args([
                "simulate",
                "curve",
                "--config",
                path_str(&cfg),
                "--sigma",
                "1.97e-21",
                "--seed",
                "4",
                "--points",
                "2",
                "--noise",
                "gaussian",
                "--molecules",
                "200000",
                "-o",
                path_str(&p),
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(p).unwrap()
    };
    assert_eq!(make("1", "one.csv"), make("3", "three.csv"));
    assert_eq!(make("0", "auto.csv"), make("1", "one_again.csv"));
}

#[test]
fn predict_writes_requested_columns() {
    let out = run(&[
        "predict",
        "--config",
        path_str(&fixture("c70_reference.cfg")),
        "--sigma",
        "1.97e-21",
        "--dmin",
        "0.035",
        "--dmax",
        "0.055",
        "--points",
        "5",
        "--monochromatic",
        "--band",
        "1.9e-21",
        "2.05e-21",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("distance_m,ratio,ratio_mono,band_lo,band_hi"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 0.035);
    assert!((first[1] - 0.61292991479).abs() < 1e-9);
    assert!(first[3] <= first[1] && first[1] <= first[4]);
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn exit_codes() {
    let cfg = fixture("c70_reference.cfg");
    // usage
    let v = error_json(&run(&["dmin"]), 1);
    assert_eq!(v["error"]["code"], "usage");
    error_json(&run(&["no-such-command"]), 1);
    let out = bin().env("RECOIL_SIGMA_THREADS", "many").args(["dmin", "--config", path_str(&cfg)]).output().unwrap();
    error_json(&out, 1);

    // config syntax vs validation
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(&cfg).unwrap();
    let bad_key = dir.path().join("bad_key.cfg");
    std::fs::write(&bad_key, text.replace("waist_y =", "wasit_y =")).unwrap();
    let v = error_json(&run(&["dmin", "--config", path_str(&bad_key)]), 1);
    assert!(v["error"]["message"].as_str().unwrap().contains("wasit_y"));
    let zero_waist = dir.path().join("zero_waist.cfg");
    std::fs::write(&zero_waist, text.replace("waist_y = 1.23 mm", "waist_y = 0 mm")).unwrap();
    error_json(&run(&["dmin", "--config", path_str(&zero_waist)]), 2);

    // data error
    error_json(
        &run(&["quick-sigma", "--config", path_str(&cfg), "--ratio", "1.5", "--distance", "0.0313"]),
        2,
    );

    // numerical failure: the minimum lies beyond the search range
    let curve = dir.path().join("deep.csv");
    std::fs::write(&curve, "distance_m,ratio,ratio_err\n0.035,0.0001,0.00001\n0.04,0.0001,0.00001\n").unwrap();
    let v = error_json(
        &run(&[
            "fit-sigma",
            "--config",
            path_str(&cfg),
            "--data",
            path_str(&curve),
            "--sigma-max",
            "1e-21",
        ]),
        3,
    );
    assert_eq!(v["error"]["code"], "no_bracket");
}

#[test]
fn output_file_is_written_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("dmin.json");
    std::fs::write(&target, "old").unwrap();
    let out = run(&["dmin", "--config", path_str(&fixture("c70_reference.cfg")), "-o", path_str(&target)]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_slice(&std::fs::read(&target).unwrap()).unwrap();
    assert!(schema("dmin").is_valid(&v));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}
