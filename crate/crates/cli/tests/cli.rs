use std::path::Path;
use std::process::{Command, Output};

fn phidro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phidro"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    assert!(o.status.success(), "{}", stderr(o));
    serde_json::from_slice(&o.stdout).expect("stdout is one JSON object")
}

#[test]
fn inner_solve_accepts_a_valid_config() {
    let v = json(&phidro(&["inner-solve", "--values", "1,2", "--eta", "1", "--divergence", "kl"]));
    assert_eq!(v["command"], "inner-solve");
    assert_eq!(v["config"]["eta"], "1");
    let g: Vec<f64> = v["gamma"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let e = std::f64::consts::E;
    assert!((g[1] - e / (1.0 + e)).abs() < 1e-12);
}

#[test]
fn negative_eta_is_a_usage_error_naming_eta() {
    let o = phidro(&["inner-solve", "--values", "1,2", "--eta", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("eta"), "{}", stderr(&o));
}

#[test]
fn missing_required_key_is_named() {
    let o = phidro(&["inner-solve", "--eta", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("values"), "{}", stderr(&o));
}

#[test]
fn flag_overrides_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# inner problem\nvalues = 1,2,3\neta = 0.5\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let from_file = json(&phidro(&["--config", cfg, "inner-solve"]));
    assert_eq!(from_file["config"]["eta"], "0.5");
    assert_eq!(from_file["config"]["values"], "1,2,3");

    let flagged = json(&phidro(&["--config", cfg, "inner-solve", "--eta", "2"]));
    assert_eq!(flagged["config"]["eta"], "2");
    assert_ne!(from_file["value"], flagged["value"]);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "values = 1,2\netta = 1\n").unwrap();
    let o = phidro(&["--config", cfg.to_str().unwrap(), "inner-solve"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("etta"), "{}", stderr(&o));
}

#[test]
fn json_floats_round_trip_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("inner.json");
    let o = phidro(&[
        "--format",
        "json",
        "inner-solve",
        "--values",
        "0.1,0.7,-0.3",
        "--eta",
        "0.3",
        "--divergence",
        "quadratic",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for g in v["gamma"].as_array().unwrap() {
        let x = g.as_f64().unwrap();
        assert!(text.contains(&format!("{x:.16e}")));
    }
}

#[test]
fn csv_has_config_header_and_lf_endings() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("density.csv");
    let o = phidro(&["density", "--grid", "200", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# phidro density\n"));
    assert!(text.contains("# eta = 0.1\n"));
    assert!(!text.contains('\r'));
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "omega,f,density");
    assert_eq!(body.len(), 201);
}

#[test]
fn zero_threads_is_a_usage_error() {
    let o = phidro(&["--threads", "0", "inner-solve", "--values", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

fn python_with_matplotlib() -> bool {
    Command::new("python3")
        .args(["-c", "import matplotlib"])
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

#[test]
fn density_csv_loads_into_plot_script() {
    if !python_with_matplotlib() {
        eprintln!("skipping: python3 with matplotlib not available");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("density.csv");
    let png = dir.path().join("density.png");
    let o = phidro(&["density", "--grid", "500", "--out", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let script = Path::new(env!("CARGO_MANIFEST_DIR")).join("scripts/plot.py");
    let p = Command::new("python3")
        .arg(script)
        .arg(&csv)
        .arg(&png)
        .output()
        .unwrap();
    assert!(p.status.success(), "{}", String::from_utf8_lossy(&p.stderr));
    let bytes = std::fs::read(&png).unwrap();
    assert_eq!(&bytes[..4], b"\x89PNG");
}
