use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;

use conewright::mesh::io::to_json_string;
use conewright::mesh::shapes;
use conewright_cli::{run_from_args, EXIT_ADMISSIBILITY, EXIT_INPUT, EXIT_OK};
use serde_json::{json, Value};
use tempfile::TempDir;

fn icosphere_files(dir: &Path, angle_turns: f64) -> (PathBuf, PathBuf) {
    let (mesh, marks) = shapes::icosphere_with_tetrahedral_marks::<f64>(3);
    let mesh_path = dir.join("ico.json");
    std::fs::write(&mesh_path, to_json_string(&mesh)).unwrap();
    let cones: Vec<Value> = marks.iter().map(|&v| json!({"vertex": v, "angle": angle_turns})).collect();
    let cones_path = dir.join("cones.json");
    std::fs::write(&cones_path, json!({"cones": cones, "angle_unit": "turns"}).to_string()).unwrap();
    (mesh_path, cones_path)
}

fn run(args: &[&str]) -> i32 {
    let mut all = vec!["conewright"];
    all.extend_from_slice(args);
    run_from_args(all)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn statuses(report: &Value) -> Vec<(String, String)> {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["name"].as_str().unwrap().to_string(), c["status"].as_str().unwrap().to_string()))
        .collect()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn flatten_admissible_icosphere_writes_report() {
    let dir = TempDir::new().unwrap();
    let (mesh, cones) = icosphere_files(dir.path(), 0.5);
    let out = dir.path().join("report.json");
    let flat = dir.path().join("flat.json");
    let code = run(&["flatten", "--mesh", p(&mesh), "--cones", p(&cones), "--out", p(&out), "--flat-mesh", p(&flat)]);
    assert_eq!(code, EXIT_OK);
    let r = read_json(&out);
    assert!(r["newton"]["iterations"].as_u64().unwrap() <= 20);
    assert!(r["max_noncone_defect"].as_f64().unwrap() <= 1e-8);
    for c in r["cones"].as_array().unwrap() {
        assert!((c["achieved_defect"].as_f64().unwrap() - PI).abs() <= 1e-8);
        assert!((c["theta"].as_f64().unwrap() - 0.5).abs() < 1e-15);
    }
    assert!(statuses(&r).iter().all(|(_, s)| s == "pass"));
    assert!(flat.exists());
}

#[test]
fn flatten_inadmissible_exits_two_and_quotes_total() {
    let dir = TempDir::new().unwrap();
    let (mesh, _) = icosphere_files(dir.path(), 0.5);
    let (_, marks) = shapes::icosphere_with_tetrahedral_marks::<f64>(3);
    // Σα = 4π + 1 instead of 4π.
    let mut cones: Vec<Value> = marks.iter().map(|&v| json!({"vertex": v, "angle": PI})).collect();
    cones[0]["angle"] = json!(PI + 1.0);
    let cones_path = dir.path().join("bad.json");
    std::fs::write(&cones_path, json!({"cones": cones}).to_string()).unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_conewright"))
        .args(["flatten", "--mesh", p(&mesh), "--cones", p(&cones_path)])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(EXIT_ADMISSIBILITY));
    let err = String::from_utf8(output.stderr).unwrap();
    assert!(err.contains("requires"), "{err}");
    assert!(err.contains(&format!("{}", 4.0 * PI)), "{err}");
}

#[test]
fn missing_mesh_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let (_, cones) = icosphere_files(dir.path(), 0.5);
    let missing = dir.path().join("nope.json");
    assert_eq!(run(&["flatten", "--mesh", p(&missing), "--cones", p(&cones)]), EXIT_INPUT);
    assert_eq!(run(&["develop", "--mesh", p(&missing)]), EXIT_INPUT);
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(run(&["frobnicate"]), EXIT_INPUT);
    assert_eq!(run(&["abelian", "--numerator", "[1]", "--denominator", "[1]", "--order", "300"]), EXIT_INPUT);
    assert_eq!(run(&["normal-form", "--theta", "0.5"]), EXIT_INPUT);
    assert_eq!(run(&["verify"]), EXIT_INPUT);
    assert_eq!(run(&["--help"]), EXIT_OK);
}

/// Coefficients of `e^{-F}` from `g' = -F' g`, kept independent of the
/// series module.
fn exp_neg(f: &[(f64, f64)], n: usize) -> Vec<(f64, f64)> {
    let mul = |a: (f64, f64), b: (f64, f64)| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
    let f0 = f[0];
    let e0 = (-f0.0).exp();
    let mut g = vec![(e0 * (-f0.1).cos(), e0 * (-f0.1).sin())];
    for k in 1..=n {
        let mut s = (0.0, 0.0);
        for j in 1..=k {
            let fj = f.get(j).copied().unwrap_or((0.0, 0.0));
            let t = mul(fj, g[k - j]);
            s.0 -= j as f64 * t.0;
            s.1 -= j as f64 * t.1;
        }
        g.push((s.0 / k as f64, s.1 / k as f64));
    }
    g
}

#[test]
fn normal_form_translation_case() {
    let dir = TempDir::new().unwrap();
    let f = [(0.3, 0.0), (0.2, -0.1), (-0.4, 0.25), (0.1, 0.05)];
    let coeffs: Vec<[f64; 2]> = f.iter().map(|c| [c.0, c.1]).collect();
    let path = dir.path().join("f.json");
    std::fs::write(&path, serde_json::to_string(&coeffs).unwrap()).unwrap();
    let out = dir.path().join("nf.json");
    assert_eq!(run(&["normal-form", "--theta", "3", "--coeffs", p(&path), "--out", p(&out)]), EXIT_OK);
    let r = read_json(&out);
    assert_eq!(r["case"], "translation");
    assert!(r["residual"].as_f64().unwrap() <= 1e-12);
    let a2 = exp_neg(&f, 2)[2];
    let expected = 2.0 * PI * a2.0.hypot(a2.1);
    assert!((r["translation_length"].as_f64().unwrap() - expected).abs() <= 1e-12);
    assert!((r["angle"].as_f64().unwrap() + 4.0 * PI).abs() <= 1e-12);
    assert_eq!(r["u"].as_array().unwrap().len(), 33);
}

#[test]
fn normal_form_cylinder_needs_circumference() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("f.json");
    std::fs::write(&path, "[1]").unwrap();
    assert_eq!(run(&["normal-form", "--theta", "1", "--coeffs", p(&path)]), EXIT_INPUT);
    let out = dir.path().join("nf.json");
    let l = format!("{}", 2.0 * PI);
    assert_eq!(
        run(&["normal-form", "--theta", "1", "--coeffs", p(&path), "--circumference", &l, "--out", p(&out)]),
        EXIT_OK
    );
    let r = read_json(&out);
    assert!((r["circumference"].as_f64().unwrap() - 2.0 * PI * (-1.0f64).exp()).abs() <= 1e-12);
}

#[test]
fn abelian_dz_is_euclidean() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("a.json");
    assert_eq!(run(&["abelian", "--numerator", "[1]", "--denominator", "[1]", "--out", p(&out)]), EXIT_OK);
    let r = read_json(&out);
    let s = r["singularities"].as_array().unwrap();
    assert_eq!(s.len(), 1);
    assert_eq!(s[0]["location"], "infinity");
    assert_eq!(s[0]["ord"], -2);
    assert!((s[0]["cone_angle"].as_f64().unwrap() + 2.0 * PI).abs() < 1e-15);
    assert_eq!(s[0]["translation_length"].as_f64().unwrap(), 0.0);
}

#[test]
fn abelian_zero_denominator_rejected() {
    assert_eq!(run(&["abelian", "--numerator", "[1]", "--denominator", "[0]"]), EXIT_INPUT);
    assert_eq!(run(&["abelian", "--numerator", "[1", "--denominator", "[1]"]), EXIT_INPUT);
}

#[test]
fn develop_flattened_icosphere() {
    let dir = TempDir::new().unwrap();
    let (mesh, cones) = icosphere_files(dir.path(), 0.5);
    let flat = dir.path().join("flat.json");
    assert_eq!(run(&["flatten", "--mesh", p(&mesh), "--cones", p(&cones), "--flat-mesh", p(&flat), "--out", p(&dir.path().join("r.json"))]), EXIT_OK);
    let svg = dir.path().join("layout.svg");
    let hol = dir.path().join("hol.json");
    assert_eq!(run(&["develop", "--mesh", p(&flat), "--base", "0", "--svg", p(&svg), "--holonomy", p(&hol)]), EXIT_OK);
    let r = read_json(&hol);
    let cones = r["cones"].as_array().unwrap();
    assert_eq!(cones.len(), 4);
    for c in cones {
        // A half-turn: rotation ±π, with a fixed point instead of a translation.
        assert!((c["rotation"].as_f64().unwrap().abs() - PI).abs() <= 1e-8);
        assert!(c["fixed_point"].is_array());
    }
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") || text.starts_with("<?xml"));
}

#[test]
fn develop_bad_base_face() {
    let dir = TempDir::new().unwrap();
    let (mesh, _) = icosphere_files(dir.path(), 0.5);
    assert_eq!(run(&["develop", "--mesh", p(&mesh), "--base", "100000"]), EXIT_INPUT);
}

#[test]
fn verify_clean_inputs_pass() {
    let dir = TempDir::new().unwrap();
    let (mesh, cones) = icosphere_files(dir.path(), 0.5);
    let f = dir.path().join("f.json");
    std::fs::write(&f, "[[0.1, 0.2], [0.3, 0], [0, -0.5]]").unwrap();
    let out = dir.path().join("v.json");
    let code = run(&[
        "verify", "--mesh", p(&mesh), "--cones", p(&cones), "--theta", "2", "--coeffs", p(&f),
        "--numerator", "[1, 0, 1]", "--denominator", "[0, -1, 0, 1]", "--out", p(&out),
    ]);
    assert_eq!(code, EXIT_OK);
    let r = read_json(&out);
    let names: Vec<String> = statuses(&r).into_iter().map(|(n, s)| { assert_eq!(s, "pass", "{n}"); n }).collect();
    for n in ["mesh", "gauss_bonnet", "flatten", "holonomy", "series_residual", "degree", "residue_sum"] {
        assert!(names.iter().any(|m| m == n), "missing {n}");
    }
}

#[test]
fn verify_negative_edge_fails_mesh_and_skips_rest() {
    let dir = TempDir::new().unwrap();
    let mut mesh: Value = serde_json::from_str(&to_json_string(&shapes::tetrahedron::<f64>())).unwrap();
    let key = mesh["edge_lengths"].as_object().unwrap().keys().next().unwrap().clone();
    mesh["edge_lengths"][key] = json!(-1.0);
    let path = dir.path().join("bad.json");
    std::fs::write(&path, mesh.to_string()).unwrap();
    let out = dir.path().join("v.json");
    assert_eq!(run(&["verify", "--mesh", p(&path), "--out", p(&out)]), conewright_cli::EXIT_NUMERICAL);
    let s = statuses(&read_json(&out));
    assert_eq!(s[0], ("mesh".into(), "fail".into()));
    assert!(s[1..].iter().all(|(_, st)| st == "skipped"));
}

#[test]
fn verify_dz() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("v.json");
    assert_eq!(run(&["verify", "--numerator", "[1]", "--denominator", "[1]", "--out", p(&out)]), EXIT_OK);
    let r = read_json(&out);
    assert_eq!(statuses(&r), vec![("degree".into(), "pass".into()), ("residue_sum".into(), "pass".into())]);
    assert_eq!(r["checks"][0]["value"].as_f64(), Some(-2.0));
}

#[test]
fn reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let (mesh, cones) = icosphere_files(dir.path(), 0.5);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        assert_eq!(run(&["flatten", "--mesh", p(&mesh), "--cones", p(&cones), "--out", p(out)]), EXIT_OK);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn angle_unit_flag_overrides_file() {
    let dir = TempDir::new().unwrap();
    let (mesh, marks) = shapes::icosphere_with_tetrahedral_marks::<f64>(2);
    let mesh_path = dir.path().join("m.json");
    std::fs::write(&mesh_path, to_json_string(&mesh)).unwrap();
    let cones: Vec<Value> = marks.iter().map(|&v| json!({"vertex": v, "angle": 180.0})).collect();
    let cones_path = dir.path().join("c.json");
    std::fs::write(&cones_path, json!({"cones": cones, "angle_unit": "rad"}).to_string()).unwrap();
    assert_eq!(run(&["flatten", "--mesh", p(&mesh_path), "--cones", p(&cones_path)]), EXIT_ADMISSIBILITY);
    let out = dir.path().join("r.json");
    assert_eq!(
        run(&["flatten", "--mesh", p(&mesh_path), "--cones", p(&cones_path), "--angle-unit", "deg", "--out", p(&out)]),
        EXIT_OK
    );
}
