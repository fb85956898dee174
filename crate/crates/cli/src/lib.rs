//! Command-line front end for `conewright`.

pub mod check;
pub mod commands;
pub mod config;
pub mod error;
pub mod json;
pub mod verify;

use std::ffi::OsString;

use clap::Parser;
use serde_json::Value;

pub use config::{Cli, RunConfig, Subcommand};
pub use error::{Failure, EXIT_ADMISSIBILITY, EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK};
pub use verify::verify_pipeline;

use check::{all_pass, checks_json, Check};
use commands::*;

/// Parses arguments and runs. Usage errors exit with the input-error code;
/// `--help` and `--version` exit with 0.
pub fn run_from_args<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli.into()),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_OK
            }
        }
    }
}

/// Executes one subcommand: 0 on success, 2 when cone angles violate
/// Gauss–Bonnet, 3 on numerical failure (including failed checks), 4 on
/// input or output errors. Diagnostics go to standard error.
pub fn run(cfg: &RunConfig) -> i32 {
    match execute(cfg) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}

fn execute(cfg: &RunConfig) -> Result<i32, Failure> {
    cfg.validate()?;
    let (report, checks) = match cfg.command {
        Subcommand::Flatten => {
            let mesh = load_mesh(cfg.require(&cfg.mesh, "--mesh")?)?;
            let p = load_cones(cfg.require(&cfg.cones, "--cones")?, cfg.angle_unit)?;
            let o = run_flatten(&mesh, &p, cfg.newton_tol, cfg.max_iter)?;
            if let Some(path) = &cfg.flat_mesh {
                write(path, &flat_mesh_json(&o.flattening))?;
            }
            (o.report, o.checks)
        }
        Subcommand::NormalForm => {
            let theta = *cfg.require(&cfg.theta, "--theta")?;
            let f = load_series(cfg.require(&cfg.coeffs, "--coeffs")?, cfg.series_order)?;
            let o = run_normal_form(&f, theta, cfg.circumference, cfg.quadrature_tol)?;
            (o.report, o.checks)
        }
        Subcommand::Abelian => {
            let num = parse_coeffs(cfg.require(&cfg.numerator, "--numerator")?, "--numerator")?;
            let den = parse_coeffs(cfg.require(&cfg.denominator, "--denominator")?, "--denominator")?;
            let o = run_abelian(&num, &den, cfg.quadratic)?;
            (o.report, o.checks)
        }
        Subcommand::Develop => {
            let mesh = load_mesh(cfg.require(&cfg.mesh, "--mesh")?)?;
            let o = run_develop(&mesh, cfg.base, cfg.svg.as_deref())?;
            (o.report, o.checks)
        }
        Subcommand::Verify => {
            let has_input = cfg.mesh.is_some()
                || (cfg.theta.is_some() && cfg.coeffs.is_some())
                || (cfg.numerator.is_some() && cfg.denominator.is_some());
            if !has_input {
                return Err(Failure::Input(
                    "verify needs --mesh, --theta with --coeffs, or --numerator with --denominator".into(),
                ));
            }
            let report = verify_pipeline(cfg);
            let ok = report["all_pass"] == Value::Bool(true);
            emit(cfg, &report)?;
            return Ok(if ok { EXIT_OK } else { EXIT_NUMERICAL });
        }
    };
    let report = with_checks(report, &checks);
    emit(cfg, &report)?;
    if all_pass(&checks) {
        Ok(EXIT_OK)
    } else {
        eprintln!("error: some checks failed");
        Ok(EXIT_NUMERICAL)
    }
}

fn with_checks(mut report: Value, checks: &[Check]) -> Value {
    report["checks"] = checks_json(checks);
    report
}

fn emit(cfg: &RunConfig, report: &Value) -> Result<(), Failure> {
    let text = json::to_string(report);
    match &cfg.out {
        Some(path) => write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
