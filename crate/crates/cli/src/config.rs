//! Command-line flags and the validated run configuration.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use conewright::flatten::{AngleUnit, DEFAULT_MAX_ITER, DEFAULT_NEWTON_TOL};
use conewright::series::DEFAULT_ORDER;

use crate::error::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Subcommand {
    /// Solve for a flat metric with prescribed cone angles.
    Flatten,
    /// Normal form of `|e^{-F} z^{-θ} dz|²` near the origin.
    NormalForm,
    /// Singularities of a rational differential on the sphere.
    Abelian,
    /// Planar layout and per-cone holonomy of a flat mesh.
    Develop,
    /// Run every check the given inputs allow.
    Verify,
}

/// Flat metrics with prescribed cone singularities.
#[derive(Debug, Clone, Parser)]
#[command(name = "conewright", version)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Subcommand,
    /// Mesh file: JSON (faces, edge_lengths, marked) or OBJ.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Cone prescription JSON.
    #[arg(long)]
    pub cones: Option<PathBuf>,
    /// Overrides the angle unit of the cone file.
    #[arg(long)]
    pub angle_unit: Option<AngleUnit>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// JSON array of `[re, im]` coefficients of `F`.
    #[arg(long)]
    pub coeffs: Option<PathBuf>,
    /// Series truncation order.
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    pub order: usize,
    /// Cylinder circumference `l` for `θ = 1`.
    #[arg(long)]
    pub circumference: Option<f64>,
    /// Numerator coefficients, lowest degree first.
    #[arg(long, allow_hyphen_values = true)]
    pub numerator: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub denominator: Option<String>,
    /// Treat the form as a quadratic differential `P/Q dz²`.
    #[arg(long)]
    pub quadratic: bool,
    #[arg(long, default_value_t = DEFAULT_NEWTON_TOL)]
    pub newton_tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    #[arg(long, default_value_t = conewright::cutoff::QUADRATURE_TOL)]
    pub quadrature_tol: f64,
    /// Base face of the layout.
    #[arg(long, default_value_t = 0)]
    pub base: usize,
    /// Report path; standard output when absent.
    #[arg(long, visible_alias = "holonomy")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Where `flatten` writes the flattened mesh.
    #[arg(long)]
    pub flat_mesh: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Subcommand,
    pub mesh: Option<PathBuf>,
    pub cones: Option<PathBuf>,
    pub angle_unit: Option<AngleUnit>,
    pub theta: Option<f64>,
    pub coeffs: Option<PathBuf>,
    pub circumference: Option<f64>,
    pub numerator: Option<String>,
    pub denominator: Option<String>,
    pub quadratic: bool,
    pub base: usize,
    pub newton_tol: f64,
    pub max_iter: usize,
    pub series_order: usize,
    pub quadrature_tol: f64,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub flat_mesh: Option<PathBuf>,
}

pub const MIN_ORDER: usize = 4;
pub const MAX_ORDER: usize = 256;

impl RunConfig {
    pub fn new(command: Subcommand) -> Self {
        Self {
            command,
            mesh: None,
            cones: None,
            angle_unit: None,
            theta: None,
            coeffs: None,
            circumference: None,
            numerator: None,
            denominator: None,
            quadratic: false,
            base: 0,
            newton_tol: DEFAULT_NEWTON_TOL,
            max_iter: DEFAULT_MAX_ITER,
            series_order: DEFAULT_ORDER,
            quadrature_tol: conewright::cutoff::QUADRATURE_TOL,
            out: None,
            svg: None,
            flat_mesh: None,
        }
    }

    pub fn validate(&self) -> Result<(), Failure> {
        for (name, v) in [
            ("--newton-tol", self.newton_tol),
            ("--quadrature-tol", self.quadrature_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Failure::Input(format!("{name} must be positive, got {v}")));
            }
        }
        if !(MIN_ORDER..=MAX_ORDER).contains(&self.series_order) {
            return Err(Failure::Input(format!(
                "--order must lie in [{MIN_ORDER}, {MAX_ORDER}], got {}",
                self.series_order
            )));
        }
        if self.max_iter == 0 {
            return Err(Failure::Input("--max-iter must be at least 1".into()));
        }
        Ok(())
    }

    pub(crate) fn require<'a, T>(&self, v: &'a Option<T>, flag: &str) -> Result<&'a T, Failure> {
        v.as_ref().ok_or_else(|| {
            Failure::Input(format!("{} needs {flag}", self.command.to_possible_value().unwrap().get_name()))
        })
    }
}

impl From<Cli> for RunConfig {
    fn from(c: Cli) -> Self {
        Self {
            command: c.command,
            mesh: c.mesh,
            cones: c.cones,
            angle_unit: c.angle_unit,
            theta: c.theta,
            coeffs: c.coeffs,
            circumference: c.circumference,
            numerator: c.numerator,
            denominator: c.denominator,
            quadratic: c.quadratic,
            base: c.base,
            newton_tol: c.newton_tol,
            max_iter: c.max_iter,
            series_order: c.order,
            quadrature_tol: c.quadrature_tol,
            out: c.out,
            svg: c.svg,
            flat_mesh: c.flat_mesh,
        }
    }
}
