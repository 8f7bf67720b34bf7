use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_extrinsic"))
        .args(args)
        .env_remove("EXTRINSIC_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json");
    let text = std::fs::read_to_string(path).unwrap();
    let doc: Value = serde_json::from_str(&text).unwrap();
    jsonschema::validator_for(&doc).expect("schema compiles")
}

fn assert_valid(doc: &Value) {
    let v = schema();
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{e} at {}", e.instance_path())).collect();
    assert!(errors.is_empty(), "schema errors: {errors:#?}");
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_sphere_on_sphere_passes() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("v.json");
    let o = run(&["verify", "sphere", "--R", "1", "--x0", "0,0,1", "--grid", "512", "--json", json.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let doc = read_json(&json);
    assert_valid(&doc);
    assert_eq!(doc["pass"], Value::Bool(true));
}

#[test]
fn verify_catenoid_beyond_guard_is_config_error() {
    let o = run(&["verify", "catenoid", "--t-max", "100", "--V", "3"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("truncation guard"));
}

#[test]
fn verify_plane_residuals_small() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("v.json");
    let o = run(&["verify", "plane", "--json", json.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let doc = read_json(&json);
    assert_valid(&doc);
    for c in doc["checks"].as_array().unwrap() {
        let worst = c["worst"].as_f64().unwrap();
        assert!(worst < 1e-3, "{} worst {worst}", c["name"]);
    }
}

#[test]
fn verify_catenoid_through_a_near_critical_level() {
    // From (1, 0, 0) the far side of the neck is a critical point of r at t = 2.
    let o = run(&["verify", "catenoid", "--V", "4", "--x0", "1,0,0"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn verify_names_worst_offender_on_failure() {
    let o = run(&["verify", "catenoid", "--identity-tol", "1e-12"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("worst offender:"));
}

#[test]
fn unknown_surface_and_bad_flags_are_config_errors() {
    assert_eq!(code(&run(&["verify", "torus_of_doom"])), 2);
    assert_eq!(code(&run(&["sweep", "plane", "--levels", "4"])), 2);
    assert_eq!(code(&run(&["sweep", "plane", "--grid", "0"])), 2);
    assert_eq!(code(&run(&["sweep", "plane", "--threads", "0"])), 2);
}

#[test]
fn plane_sweep_csv_columns_and_constant_u1() {
    let o = run(&["sweep", "plane", "--levels", "16", "--t-min", "1", "--t-max", "8"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        [
            "t", "regular", "v", "vprime_coarea", "chi_Mt", "intK", "intH2", "intA2", "int_xperpH",
            "int_xperpH_abs", "u1", "u2", "prop22_res", "prop23_res", "min_grad_r"
        ]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 16);
    for r in &rows {
        let u1: f64 = r[10].parse().unwrap();
        assert!((u1 - std::f64::consts::PI).abs() < 1e-3, "u1 = {u1}");
    }
}

#[test]
fn helicoid_sweep_flags_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("s.json");
    let csv = dir.path().join("s.csv");
    let o = run(&["sweep", "helicoid", "--json", json.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    let doc = read_json(&json);
    assert_valid(&doc);
    assert_eq!(doc["hypothesis_violated"], Value::Bool(true));
    assert_eq!(doc["hypotheses"]["int_A2"]["verdict"], "diverging");
    assert!(csv.exists());
}

#[test]
fn defect_json_validates_and_exit_codes() {
    let o = run(&["defect", "plane"]);
    assert_eq!(code(&o), 0);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_valid(&doc);
    assert_eq!(doc["nearest_integer"], 1);

    let o = run(&["defect", "graph_paraboloid"]);
    assert_eq!(code(&o), 3);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_valid(&doc);
    assert!(doc["growth_certificate"]["refused"].is_string());

    let o = run(&["defect", "sphere", "--x0", "0,0,1"]);
    assert_eq!(code(&o), 3);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_valid(&doc);
    assert_eq!(doc["applicable"], Value::Bool(false));
}

#[test]
fn mesh_from_obj_and_from_surface() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("ico.obj");
    std::fs::write(&obj, extrinsic_core::discrete::icosphere(3, 1.0).to_obj()).unwrap();
    let json = dir.path().join("m.json");
    let o = run(&["mesh", obj.to_str().unwrap(), "--x0", "0,0,1", "--json", json.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&json);
    assert_valid(&doc);
    assert_eq!(doc["vertices"], 642);
    assert_eq!(doc["faces"], 1280);
    assert_eq!(doc["chi"], 2);
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.starts_with("t,v,chi_Mt,D\n"));

    let o = run(&["mesh", "catenoid", "--json", json.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let doc = read_json(&json);
    assert_valid(&doc);
    assert_eq!(doc["chi"], 0);
    assert_eq!(doc["declared_chi"], 0);
}

#[test]
fn malformed_obj_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("bad.obj");
    std::fs::write(&obj, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 x\n").unwrap();
    let o = run(&["mesh", obj.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
}

#[test]
fn config_file_with_command_line_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    let csv = dir.path().join("out.csv");
    std::fs::write(
        &cfg,
        format!(
            "[surface]\nname = catenoid\nV = 3\n\n[grid]\nresolution = 128\n\n[levels]\nt_min = 1.5\nt_max = 6\ncount = 10\nspacing = linear\n\n[output]\ncsv = {}\n",
            csv.display()
        ),
    )
    .unwrap();
    let o = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 11);

    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--t-max", "100"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn user_surface_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("user.ini");
    std::fs::write(
        &cfg,
        "[surface]\nname = user\nx1 = a*u\nx2 = a*v\nx3 = 0\nu_min = -10\nu_max = 10\nv_min = -10\nv_max = 10\na = 1\nchi = 1\n\n[levels]\nt_min = 1\nt_max = 7\n",
    )
    .unwrap();
    let o = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &Path, n: &str| {
        run(&["sweep", "enneper", "--grid", "192", "--threads", n, "--csv", p.to_str().unwrap()])
    };
    assert_eq!(code(&args(&a, "1")), 0);
    assert_eq!(code(&args(&b, "4")), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let env = Command::new(env!("CARGO_BIN_EXE_extrinsic"))
        .args(["sweep", "enneper", "--grid", "192", "--csv", dir.path().join("c.csv").to_str().unwrap()])
        .env("EXTRINSIC_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(code(&env), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(dir.path().join("c.csv")).unwrap());
}
