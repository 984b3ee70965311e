use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use weakmeas::cli::output::to_canonical_json;

fn weakmeas(args: &[&str]) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_weakmeas"));
    c.args(args).env_remove("WEAKMEAS_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    weakmeas(args).output().unwrap()
}

fn json_of(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, v: &serde_json::Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

fn small_theta30() -> serde_json::Value {
    let text = run(&["presets", "qubit-theta30"]).stdout;
    let mut v: serde_json::Value = serde_json::from_slice(&text).unwrap();
    v["run"]["samples"] = 20_000.into();
    v
}

#[test]
fn presets_listing_and_golden_files() {
    let out = run(&["presets"]);
    assert!(out.status.success());
    let listing = String::from_utf8(out.stdout).unwrap();
    assert!(listing.contains("qubit-theta30") && listing.contains("imaginary-sigma-x"));
    for name in ["qubit-theta30", "imaginary-sigma-x"] {
        let shown = run(&["presets", name]).stdout;
        let golden = std::fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(format!("{name}.json")));
        assert_eq!(shown, golden.unwrap());
    }
    assert_eq!(run(&["presets", "nope"]).status.code(), Some(2));
}

#[test]
fn closed_form_weak_value() {
    let out = run(&["run", "--preset", "qubit-theta30", "--mode", "closed-form"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert!((v["weak_value"][0].as_f64().unwrap() - 2.0).abs() <= 1e-12);
    assert!(v["weak_value"][1].as_f64().unwrap().abs() <= 1e-12);
    assert!(out.stderr.is_empty());
}

#[test]
fn output_round_trip_is_byte_identical() {
    for mode in ["closed-form", "exact-moments", "sample-pointer", "diagnostics"] {
        let out = run(&["run", "--preset", "qubit-theta30", "--mode", mode, "--samples", "5000"]);
        assert!(out.status.success(), "{mode}");
        let text = String::from_utf8(out.stdout).unwrap();
        let reparsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(to_canonical_json(&reparsed), text, "{mode}");
    }
}

#[test]
fn csv_format() {
    let out = run(&["run", "--preset", "qubit-theta30", "--mode", "closed-form", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("field,value\n"));
    assert!(text.contains("\nweak_value.0,"));
}

#[test]
fn seed_precedence_flag_env_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.json", &small_theta30());
    let cfg = cfg.to_str().unwrap();
    let seed_of = |extra: &[&str], env: Option<&str>| {
        let mut args = vec!["run", "--config", cfg];
        args.extend_from_slice(extra);
        let mut c = weakmeas(&args);
        if let Some(e) = env {
            c.env("WEAKMEAS_SEED", e);
        }
        let v: serde_json::Value = serde_json::from_slice(&c.output().unwrap().stdout).unwrap();
        v["seed"].as_u64().unwrap()
    };
    assert_eq!(seed_of(&[], None), 42);
    assert_eq!(seed_of(&[], Some("7")), 7);
    assert_eq!(seed_of(&["--seed", "9"], Some("7")), 9);

    let bad = weakmeas(&["run", "--config", cfg]).env("WEAKMEAS_SEED", "x").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn validation_errors_exit_2_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = small_theta30();
    v["A_matrix"] = serde_json::json!([[[0, 0.1], [1, 0]], [[1, 0], [0, 0.1]]]);
    let p = write(dir.path(), "bad.json", &v);
    let out = run(&["run", "--config", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("not_hermitian") && err.contains("A_matrix"), "{err}");
    assert!(out.stdout.is_empty());

    let mut v = small_theta30();
    v["pointer_A"]["extent"] = 4.into();
    let p = write(dir.path(), "grid.json", &v);
    let out = run(&["run", "--config", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("grid_extent"));

    assert_eq!(run(&["run"]).status.code(), Some(2));
    assert_eq!(run(&["run", "--preset", "qubit-theta30", "--mode", "fast"]).status.code(), Some(2));
    assert_eq!(run(&["run", "--config", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn empty_post_selection_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = small_theta30();
    v.as_object_mut().unwrap().remove("theta_deg");
    v["I_vector"] = serde_json::json!([[1, 0], [0, 0]]);
    v["F_vector"] = serde_json::json!([[0, 0], [1, 0]]);
    v["gA_tA"] = 0.0.into();
    v["run"]["mode"] = "sample-ideal".into();
    let p = write(dir.path(), "orth.json", &v);
    let out_path = dir.path().join("out.json");
    let out = run(&["run", "--config", p.to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr).unwrap().contains("post-selection"));
    assert!(!out_path.exists());
}

#[test]
fn record_dump_format() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("rec.csv");
    let out = run(&[
        "run", "--preset", "qubit-theta30", "--samples", "1000", "--dump-records", dump.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&dump).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,value_A,value_F,selected"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 1000);
    let selected = rows.iter().filter(|r| r.ends_with(",true")).count() as u64;
    assert_eq!(json_of(&out)["n_selected"].as_u64(), Some(selected));
}

#[test]
fn sweep_csv_shape_and_consistency() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let status = run(&[
        "sweep", "--preset", "qubit-theta30", "--mode", "exact-moments", "--param", "gA_tA", "--values",
        "0.01,0.02,0.05,0.1", "--out", out.to_str().unwrap(),
    ])
    .status;
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "param,value,estimate,std_error,re_formula,im_formula,abs_error");
    assert_eq!(lines.len(), 5);
    let errs: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(6).unwrap().parse().unwrap()).collect();
    assert!(errs.windows(2).all(|w| w[0] <= w[1]), "{errs:?}");

    // a single-value sweep reproduces the run output
    let one = dir.path().join("one.csv");
    run(&[
        "sweep", "--preset", "qubit-theta30", "--mode", "exact-moments", "--param", "gA_tA", "--values", "0.05",
        "--out", one.to_str().unwrap(),
    ]);
    let row = std::fs::read_to_string(&one).unwrap();
    let est: f64 = row.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    let v = json_of(&run(&["run", "--preset", "qubit-theta30", "--mode", "exact-moments"]));
    assert_eq!(est, v["estimate"].as_f64().unwrap());
}

#[test]
fn theta_sweep_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("theta.csv");
    let o = out.to_str().unwrap();
    assert!(run(&["sweep", "--preset", "qubit-theta30", "--mode", "closed-form", "--param", "theta", "--values", "0,30", "--out", o])
        .status
        .success());
    let text = std::fs::read_to_string(&out).unwrap();
    let re: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(4).unwrap().parse().unwrap()).collect();
    assert!((re[0] - 1.0).abs() < 1e-12 && (re[1] - 2.0).abs() < 1e-12);

    let bad = run(&["sweep", "--preset", "qubit-theta30", "--param", "hbar", "--values", "1", "--out", o]);
    assert_eq!(bad.status.code(), Some(2));
    let bad = run(&["sweep", "--preset", "imaginary-sigma-x", "--param", "theta", "--values", "1", "--out", o]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn diagnostics_on_identity_observable() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = small_theta30();
    v["A_matrix"] = serde_json::json!([[[1, 0], [0, 0]], [[0, 0], [1, 0]]]);
    v["run"]["mode"] = "diagnostics".into();
    let p = write(dir.path(), "id.json", &v);
    let r = json_of(&run(&["run", "--config", p.to_str().unwrap()]));
    for rep in r["separability_after_A"].as_array().unwrap() {
        assert_eq!(rep["is_product"], true, "{rep}");
    }
}
