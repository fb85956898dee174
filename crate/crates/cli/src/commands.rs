//! The four computational subcommands. Each returns its report and the
//! checks it ran, so `verify` can reuse them.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::Path;

use conewright::abelian::{analyze, FormKind, Location, MeromorphicForm};
use conewright::curvature::{angle_defects, check_gauss_bonnet};
use conewright::cutoff::{cutoff_log_integral_tol, CutoffProfile};
use conewright::develop::{emit_svg, holonomy_around, layout, SvgLabel};
use conewright::flatten::{flatten, AngleUnit, ConePrescriptionJson, Flattening};
use conewright::mesh::io::{load, to_json_string};
use conewright::normal_form::{normal_form_extended, verify_normal_form, NormalFormCase};
use conewright::scalar::wrap_angle;
use conewright::series::{parse_complex_list, PowerSeries};
use conewright::{Complex64, Mesh, Prescription};
use serde_json::{json, Value};

use crate::check::Check;
use crate::error::Failure;
use crate::json::complex;

pub const GAUSS_BONNET_TOL: f64 = 1e-9;
pub const HOLONOMY_TOL: f64 = 1e-8;
pub const SERIES_RESIDUAL_TOL: f64 = 1e-12;
pub const RESIDUE_SUM_TOL: f64 = 1e-9;
pub const CUTOFF_TOL: f64 = 1e-6;
/// Vertices with `|defect|` above this are treated as cones by `develop`.
pub const CONE_DEFECT_TOL: f64 = 1e-8;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

pub fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

pub fn load_mesh(path: &Path) -> Result<Mesh, Failure> {
    Ok(load(path)?)
}

pub fn load_cones(path: &Path, unit: Option<AngleUnit>) -> Result<Prescription, Failure> {
    let raw: ConePrescriptionJson = serde_json::from_str(&read(path)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(raw.to_prescription(unit))
}

pub fn mesh_summary(mesh: &Mesh) -> Value {
    json!({
        "vertices": mesh.n_vertices(),
        "edges": mesh.n_edges(),
        "faces": mesh.n_faces(),
        "euler_characteristic": mesh.euler_characteristic(),
        "marked": mesh.marked(),
    })
}

pub fn gauss_bonnet_check(mesh: &Mesh) -> Check {
    match check_gauss_bonnet(mesh) {
        Ok(gap) => Check::bound("gauss_bonnet", gap, GAUSS_BONNET_TOL, "|Σ defects − 2πχ|"),
        Err(e) => Check::flag("gauss_bonnet", false, None, e.to_string()),
    }
}

/// Marks every in-range cone vertex so that plain OBJ meshes can be used.
fn with_cone_marks(mesh: &Mesh, p: &Prescription) -> Result<Mesh, Failure> {
    let marks: BTreeSet<usize> = mesh
        .marked()
        .iter()
        .copied()
        .chain(p.cones.iter().map(|c| c.vertex).filter(|&v| v < mesh.n_vertices()))
        .collect();
    Ok(mesh.with_marked(marks)?)
}

pub struct Outcome {
    pub report: Value,
    pub checks: Vec<Check>,
}

pub struct FlattenOutcome {
    pub report: Value,
    pub checks: Vec<Check>,
    pub flattening: Flattening<f64>,
}

pub fn run_flatten(
    mesh: &Mesh,
    p: &Prescription,
    tol: f64,
    max_iter: usize,
) -> Result<FlattenOutcome, Failure> {
    let mesh = with_cone_marks(mesh, p)?;
    let fl = flatten(&mesh, p, tol, max_iter)?;
    let defects = angle_defects(&fl.flat_mesh)?.defect;
    let targets = p.target_defects(mesh.n_vertices());
    let cone_set: BTreeSet<usize> = p.cones.iter().map(|c| c.vertex).collect();
    let mut max_flat = 0.0f64;
    let mut max_cone = 0.0f64;
    for (v, (d, t)) in defects.iter().zip(&targets).enumerate() {
        let e = (d - t).abs();
        if cone_set.contains(&v) {
            max_cone = max_cone.max(e);
        } else {
            max_flat = max_flat.max(e);
        }
    }
    let cones: Vec<Value> = fl
        .cones
        .iter()
        .map(|c| {
            json!({
                "vertex": c.vertex,
                "angle": c.angle,
                "theta": c.theta,
                "translation_capable": c.translation_capable,
                "target_defect": targets[c.vertex],
                "achieved_defect": defects[c.vertex],
            })
        })
        .collect();
    let checks = vec![
        Check::flag("admissibility", true, None, "Σα = 2πN − 2πχ"),
        gauss_bonnet_check(&fl.flat_mesh),
        Check::bound("flatness", max_flat, tol, "max |defect| at non-cone vertices"),
        Check::bound("cone_defects", max_cone, tol, "max |defect − (2π − α)| at cones"),
    ];
    let report = json!({
        "command": "flatten",
        "mesh": mesh_summary(&mesh),
        "cones": cones,
        "newton": {
            "iterations": fl.newton.iterations,
            "residual": fl.newton.residual,
            "history": fl.newton.history,
            "tolerance": tol,
            "max_iter": max_iter,
        },
        "linearized_residual": fl.linearized.residual,
        "max_noncone_defect": max_flat,
        "max_cone_error": max_cone,
        "u": fl.newton.factor.u,
    });
    Ok(FlattenOutcome {
        report,
        checks,
        flattening: fl,
    })
}

pub fn flat_mesh_json(fl: &Flattening<f64>) -> String {
    to_json_string(&fl.flat_mesh)
}

pub fn run_develop(mesh: &Mesh, base: usize, svg: Option<&Path>) -> Result<Outcome, Failure> {
    let lay = layout(mesh, base)?;
    let defects = angle_defects(mesh)?.defect;
    let mut cones = Vec::new();
    let mut max_rot_err = 0.0f64;
    let mut max_flat = 0.0f64;
    let mut labels = Vec::new();
    let diameter = lay
        .positions()
        .iter()
        .flatten()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    for (v, &d) in defects.iter().enumerate() {
        let motion = holonomy_around(mesh, &lay, v)?;
        let is_cone = mesh.is_marked(v) || d.abs() > CONE_DEFECT_TOL;
        if !is_cone {
            max_flat = max_flat.max(motion.rotation.abs()).max(motion.translation.norm() / diameter);
            continue;
        }
        let rot_err = wrap_angle(motion.rotation - d).abs();
        max_rot_err = max_rot_err.max(rot_err);
        let angle = 2.0 * PI - d;
        let mut entry = json!({
            "vertex": v,
            "defect": d,
            "angle": angle,
            "rotation": motion.rotation,
            "rotation_error": rot_err,
            "translation": complex(motion.translation),
        });
        match motion.translation_length(HOLONOMY_TOL) {
            Some(len) => entry["translation_length"] = json!(len),
            None => {
                entry["fixed_point"] = motion
                    .fixed_point(HOLONOMY_TOL)
                    .map(complex)
                    .unwrap_or(Value::Null)
            }
        }
        cones.push(entry);
        labels.push(SvgLabel {
            vertex: v,
            text: format!("{v}: {:.4}π", angle / PI),
        });
    }
    if let Some(path) = svg {
        emit_svg(mesh, &lay, &labels, path)?;
    }
    let checks = vec![
        gauss_bonnet_check(mesh),
        Check::bound("holonomy", max_rot_err, HOLONOMY_TOL, "max |rotation − defect| mod 2π at cones"),
        Check::bound(
            "flat_vertex_holonomy",
            max_flat,
            HOLONOMY_TOL,
            "max |rotation|, |translation|/diameter around non-cone vertices",
        ),
    ];
    let report = json!({
        "command": "develop",
        "mesh": mesh_summary(mesh),
        "base_face": base,
        "cones": cones,
    });
    Ok(Outcome { report, checks })
}

pub fn load_series(path: &Path, order: usize) -> Result<PowerSeries<f64>, Failure> {
    Ok(PowerSeries::from_json(&read(path)?, order)?)
}

pub fn run_normal_form(
    f: &PowerSeries<f64>,
    theta: f64,
    circumference: Option<f64>,
    quadrature_tol: f64,
) -> Result<Outcome, Failure> {
    let (nf, residual) = normal_form_extended(f, theta, circumference)?;
    let residual_f64 = verify_normal_form(f, theta, &nf)?;
    let case = match nf.case {
        NormalFormCase::Smooth => "smooth",
        NormalFormCase::Cone => "cone",
        NormalFormCase::Cylinder => "cylinder",
        NormalFormCase::Translation => "translation",
    };
    let profile = CutoffProfile::new(1.0)?;
    let flux = cutoff_log_integral_tol(&profile, theta, quadrature_tol)?;
    let checks = vec![
        Check::bound(
            "series_residual",
            residual,
            SERIES_RESIDUAL_TOL,
            "defining identity, double-double arithmetic",
        ),
        Check::bound(
            "cutoff_flux",
            (flux - 2.0 * PI * theta).abs(),
            CUTOFF_TOL,
            "∫Δ(θφ log r) − 2πθ with ε = 1",
        ),
    ];
    let report = json!({
        "command": "normal-form",
        "theta": nf.theta,
        "angle": nf.angle,
        "case": case,
        "order": nf.u.order(),
        "u": nf.u.to_pairs(),
        "circumference": nf.circumference,
        "translation_c": nf.translation_c.map(complex),
        "translation_length": nf.translation_length,
        "imaginary_shift": nf.imaginary_shift,
        "newton_iterations": nf.newton_iterations,
        "residual": residual,
        "residual_f64": residual_f64,
        "cutoff_flux": flux,
    });
    Ok(Outcome { report, checks })
}

pub fn parse_coeffs(text: &str, flag: &str) -> Result<Vec<Complex64>, Failure> {
    let value: Value = serde_json::from_str(text).map_err(|e| Failure::Input(format!("{flag}: {e}")))?;
    parse_complex_list(&value).map_err(|e| Failure::Input(format!("{flag}: {e}")))
}

pub fn run_abelian(num: &[Complex64], den: &[Complex64], quadratic: bool) -> Result<Outcome, Failure> {
    let form = if quadratic {
        MeromorphicForm::quadratic(num, den)?
    } else {
        MeromorphicForm::abelian(num, den)?
    };
    let a = analyze(&form)?;
    let expected = match a.kind {
        FormKind::Abelian => -2,
        FormKind::Quadratic => -4,
    };
    let degree = a.degree();
    let sum = a.residue_sum();
    let scale = a
        .singularities
        .iter()
        .map(|s| s.residue.norm())
        .fold(1.0f64, f64::max);
    let mut checks = vec![Check::flag(
        "degree",
        degree == expected,
        Some(degree as f64),
        format!("Σ ord = {expected}"),
    )];
    checks.push(match a.kind {
        FormKind::Abelian => Check::bound(
            "residue_sum",
            sum.norm(),
            RESIDUE_SUM_TOL * scale,
            "|Σ residues| over the sphere",
        ),
        FormKind::Quadratic => Check::skipped("residue_sum", "quadratic differential"),
    });
    let singularities: Vec<Value> = a
        .singularities
        .iter()
        .map(|s| {
            json!({
                "location": match s.location {
                    Location::Finite(z) => complex(z),
                    Location::Infinity => json!("infinity"),
                },
                "ord": s.ord,
                "residue": complex(s.residue),
                "cone_angle": s.cone_angle,
                "cylinder_circumference": s.cylinder_circumference,
                "translation_length": s.translation_length,
            })
        })
        .collect();
    let report = json!({
        "command": "abelian",
        "kind": if quadratic { "quadratic" } else { "abelian" },
        "singularities": singularities,
        "degree": degree,
        "expected_degree": expected,
        "residue_sum": complex(sum),
        "total_cone_angle": a.total_cone_angle(),
        "cancelled": a.cancelled.iter().map(|(z, m)| json!({"at": complex(*z), "multiplicity": m})).collect::<Vec<_>>(),
        "warnings": a.warnings,
    });
    Ok(Outcome { report, checks })
}
