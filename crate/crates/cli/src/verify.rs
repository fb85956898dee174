//! `verify`: every check the supplied inputs allow, as report entries.

use serde_json::{json, Value};

use crate::check::{checks_json, Check};
use crate::commands::{
    gauss_bonnet_check, load_cones, load_mesh, load_series, mesh_summary, parse_coeffs, run_abelian,
    run_develop, run_flatten, run_normal_form,
};
use crate::config::RunConfig;
use crate::error::Failure;

/// Runs Gauss–Bonnet, flattening, holonomy, series-residual, degree and
/// residue-sum checks on whatever inputs `cfg` names. A failing stage turns
/// into a `fail` entry and the checks that depend on it into `skipped`.
pub fn verify_pipeline(cfg: &RunConfig) -> Value {
    let mut checks = Vec::new();
    let mut sections = serde_json::Map::new();
    if let Some(path) = &cfg.mesh {
        verify_mesh(cfg, path, &mut checks, &mut sections);
    }
    if let (Some(theta), Some(path)) = (cfg.theta, &cfg.coeffs) {
        let run = load_series(path, cfg.series_order)
            .and_then(|f| run_normal_form(&f, theta, cfg.circumference, cfg.quadrature_tol));
        match run {
            Ok(o) => {
                sections.insert("normal_form".into(), o.report);
                checks.extend(o.checks);
            }
            Err(e) => {
                checks.push(Check::flag("series_residual", false, None, e.to_string()));
                checks.push(Check::skipped("cutoff_flux", "normal form failed"));
            }
        }
    }
    if let (Some(num), Some(den)) = (&cfg.numerator, &cfg.denominator) {
        let run = parse_coeffs(num, "--numerator").and_then(|n| {
            let d = parse_coeffs(den, "--denominator")?;
            run_abelian(&n, &d, cfg.quadratic)
        });
        match run {
            Ok(o) => {
                sections.insert("abelian".into(), o.report);
                checks.extend(o.checks);
            }
            Err(e) => {
                checks.push(Check::flag("degree", false, None, e.to_string()));
                checks.push(Check::skipped("residue_sum", "form analysis failed"));
            }
        }
    }
    json!({
        "command": "verify",
        "checks": checks_json(&checks),
        "all_pass": crate::check::all_pass(&checks),
        "details": Value::Object(sections),
    })
}

fn verify_mesh(
    cfg: &RunConfig,
    path: &std::path::Path,
    checks: &mut Vec<Check>,
    sections: &mut serde_json::Map<String, Value>,
) {
    let dependent = ["gauss_bonnet", "flatten", "holonomy"];
    let mesh = match load_mesh(path) {
        Ok(m) => m,
        Err(e) => {
            checks.push(Check::flag("mesh", false, None, e.to_string()));
            for name in dependent {
                checks.push(Check::skipped(name, "mesh failed to load"));
            }
            return;
        }
    };
    checks.push(Check::flag("mesh", true, Some(mesh.n_faces() as f64), "faces"));
    sections.insert("mesh".into(), mesh_summary(&mesh));
    checks.push(gauss_bonnet_check(&mesh));

    let target = match &cfg.cones {
        None => Some(mesh.clone()),
        Some(cones) => {
            let run = load_cones(cones, cfg.angle_unit)
                .and_then(|p| run_flatten(&mesh, &p, cfg.newton_tol, cfg.max_iter));
            match run {
                Ok(o) => {
                    checks.push(Check::flag("flatten", true, Some(o.flattening.newton.iterations as f64), "Newton iterations"));
                    checks.extend(o.checks.into_iter().filter(|c| c.name != "gauss_bonnet"));
                    sections.insert("flatten".into(), o.report);
                    Some(o.flattening.flat_mesh)
                }
                Err(e) => {
                    let name = match e {
                        Failure::Admissibility(_) => "admissibility",
                        _ => "flatten",
                    };
                    checks.push(Check::flag(name, false, None, e.to_string()));
                    None
                }
            }
        }
    };
    match target {
        Some(flat) => match run_develop(&flat, cfg.base, None) {
            Ok(o) => {
                checks.extend(o.checks.into_iter().filter(|c| c.name != "gauss_bonnet"));
                sections.insert("develop".into(), o.report);
            }
            Err(e) => checks.push(Check::flag("holonomy", false, None, e.to_string())),
        },
        None => checks.push(Check::skipped("holonomy", "no flat mesh")),
    }
}
