//! Cone prescriptions and the discrete conformal flattener.
//!
//! A conformal factor `u` rescales every edge by `exp((u_i + u_j) / 2)`.
//! The flattener looks for `u` such that the rescaled metric has zero angle
//! defect away from the cone vertices and defect `2π − α` at a cone of
//! angle `α`. Such a target is attainable only when the defects sum to
//! `2πχ`, i.e. `Σ α_j = 2πN − 2πχ`, equivalently `Σ θ_j = χ` with
//! `θ = 1 − α/2π`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curvature::defects_with_lengths;
use crate::laplacian::cotan_laplacian;
use crate::mesh::{triangle_violation, FaceId, MeshError, TriangleMesh, VertexId};
use crate::scalar::Scalar;
use crate::sparse::{solve_laplacian, subtract_mean};

pub const DEFAULT_NEWTON_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 50;
/// Tolerance on `|Σα − (2πN − 2πχ)|`.
pub const ADMISSIBILITY_TOL: f64 = 1e-9;
const MAX_HALVINGS: usize = 30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlattenError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("cone vertex {vertex} is not a vertex of the mesh")]
    UnknownVertex { vertex: VertexId },
    #[error("vertex {vertex} carries more than one cone")]
    DuplicateCone { vertex: VertexId },
    #[error("cone vertex {vertex} is not marked on the mesh")]
    NotMarked { vertex: VertexId },
    #[error(
        "cone angles sum to {total} rad but Gauss-Bonnet requires 2πN − 2πχ = {required} rad (N = {cones}, χ = {chi})"
    )]
    Inadmissible {
        total: f64,
        required: f64,
        cones: usize,
        chi: i64,
    },
    #[error("linear solve broke down (residual {residual:e})")]
    SolverBreakdown { residual: f64 },
    #[error("face {face} degenerates at Newton iteration {iteration}: no feasible step")]
    Degenerate { face: FaceId, iteration: usize },
    #[error("Newton did not converge in {iterations} iterations (best residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("conformal factor has {got} entries, mesh has {expected} vertices")]
    FactorLength { expected: usize, got: usize },
}

/// Unit in which cone angles are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleUnit {
    #[default]
    Rad,
    Deg,
    /// Fractions of a full turn, `α / 2π`.
    Turns,
}

impl AngleUnit {
    pub fn to_radians<T: Scalar>(self, a: T) -> T {
        match self {
            AngleUnit::Rad => a,
            AngleUnit::Deg => a.to_radians(),
            AngleUnit::Turns => a * T::two_pi(),
        }
    }
}

impl std::str::FromStr for AngleUnit {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rad" => Ok(Self::Rad),
            "deg" => Ok(Self::Deg),
            "turns" => Ok(Self::Turns),
            other => Err(format!("unknown angle unit {other:?} (rad, deg, turns)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cone<T> {
    pub vertex: VertexId,
    /// Cone angle in radians.
    pub angle: T,
}

impl<T: Scalar> Cone<T> {
    /// `θ = 1 − α/2π`.
    pub fn theta(&self) -> T {
        T::one() - self.angle / T::two_pi()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConePrescription<T> {
    pub cones: Vec<Cone<T>>,
}

impl<T: Scalar> ConePrescription<T> {
    pub fn new(cones: impl IntoIterator<Item = (VertexId, T)>) -> Self {
        Self {
            cones: cones
                .into_iter()
                .map(|(vertex, angle)| Cone { vertex, angle })
                .collect(),
        }
    }

    pub fn thetas(&self) -> Vec<T> {
        self.cones.iter().map(Cone::theta).collect()
    }

    /// Target defect per vertex: `2π − α` at cones, zero elsewhere.
    pub fn target_defects(&self, n_vertices: usize) -> Vec<T> {
        let mut k = vec![T::zero(); n_vertices];
        for c in &self.cones {
            k[c.vertex] = T::two_pi() - c.angle;
        }
        k
    }
}

/// Cone prescription file: `{"cones": [{"vertex": i, "angle": a}], "angle_unit": "rad"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConePrescriptionJson {
    pub cones: Vec<ConeJson>,
    #[serde(default)]
    pub angle_unit: AngleUnit,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConeJson {
    pub vertex: VertexId,
    pub angle: f64,
}

impl ConePrescriptionJson {
    /// Converts to radians; `unit` overrides the file's own unit when given.
    pub fn to_prescription<T: Scalar>(&self, unit: Option<AngleUnit>) -> ConePrescription<T> {
        let unit = unit.unwrap_or(self.angle_unit);
        ConePrescription::new(
            self.cones
                .iter()
                .map(|c| (c.vertex, unit.to_radians(T::lit(c.angle)))),
        )
    }
}

/// A cone that passed admissibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatedCone<T> {
    pub vertex: VertexId,
    pub angle: T,
    pub theta: T,
    /// `θ ∈ {2, 3, …}`: angle in `−2πℕ*`, may carry a translation component.
    pub translation_capable: bool,
}

fn is_integer_at_least_two<T: Scalar>(theta: T) -> bool {
    let r = theta.round();
    r >= T::lit(2.0) && (theta - r).abs() <= T::lit(1e-9)
}

/// Checks the Gauss–Bonnet constraint and returns per-cone exponents.
pub fn validate_prescription<T: Scalar>(
    mesh: &TriangleMesh<T>,
    p: &ConePrescription<T>,
) -> Result<Vec<ValidatedCone<T>>, FlattenError> {
    let mut seen = BTreeSet::new();
    for c in &p.cones {
        if c.vertex >= mesh.n_vertices() {
            return Err(FlattenError::UnknownVertex { vertex: c.vertex });
        }
        if !seen.insert(c.vertex) {
            return Err(FlattenError::DuplicateCone { vertex: c.vertex });
        }
        if !mesh.is_marked(c.vertex) {
            return Err(FlattenError::NotMarked { vertex: c.vertex });
        }
    }
    let n = p.cones.len();
    let chi = mesh.euler_characteristic();
    let total = p.cones.iter().fold(T::zero(), |s, c| s + c.angle);
    let required = T::two_pi() * T::lit((n as i64 - chi) as f64);
    let scale = p.cones.iter().fold(required.abs(), |s, c| s + c.angle.abs());
    let tol = T::lit(ADMISSIBILITY_TOL).max(T::lit(16.0) * T::epsilon() * scale);
    if !((total - required).abs() <= tol) {
        return Err(FlattenError::Inadmissible {
            total: total.to_f64_lossy(),
            required: required.to_f64_lossy(),
            cones: n,
            chi,
        });
    }
    Ok(p
        .cones
        .iter()
        .map(|c| {
            let theta = c.theta();
            ValidatedCone {
                vertex: c.vertex,
                angle: c.angle,
                theta,
                translation_capable: is_integer_at_least_two(theta),
            }
        })
        .collect())
}

/// Per-vertex logarithmic scale factor, normalized to zero mean.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalFactor<T> {
    pub u: Vec<T>,
}

impl<T: Scalar> ConformalFactor<T> {
    pub fn zero(n: usize) -> Self {
        Self { u: vec![T::zero(); n] }
    }

    /// Subtracts the mean (the factor is only defined up to a constant).
    pub fn normalized(mut self) -> Self {
        subtract_mean(&mut self.u);
        self
    }
}

/// Rescaled lengths `ℓ_ij · exp((u_i + u_j)/2)`.
pub fn scaled_lengths<T: Scalar>(mesh: &TriangleMesh<T>, u: &[T]) -> Vec<T> {
    let half = T::lit(0.5);
    mesh.edges()
        .iter()
        .zip(mesh.lengths())
        .map(|(&[i, j], &l)| l * (half * (u[i] + u[j])).exp())
        .collect()
}

fn first_violation<T: Scalar>(mesh: &TriangleMesh<T>, lengths: &[T]) -> Option<FaceId> {
    (0..mesh.n_faces()).find(|&f| {
        let l = mesh.face_lengths_in(f, lengths);
        triangle_violation(l).is_some() || l.iter().any(|x| !(x.is_finite() && *x > T::zero()))
    })
}

fn check_len<T>(mesh: &TriangleMesh<T>, u: &[T]) -> Result<(), FlattenError>
where
    T: Scalar,
{
    if u.len() != mesh.n_vertices() {
        return Err(FlattenError::FactorLength {
            expected: mesh.n_vertices(),
            got: u.len(),
        });
    }
    Ok(())
}

/// Mesh with rescaled edge lengths; combinatorics and marks unchanged.
pub fn apply_factor<T: Scalar>(
    mesh: &TriangleMesh<T>,
    factor: &ConformalFactor<T>,
) -> Result<TriangleMesh<T>, FlattenError> {
    check_len(mesh, &factor.u)?;
    Ok(mesh.with_lengths(scaled_lengths(mesh, &factor.u))?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedSolution<T> {
    pub factor: ConformalFactor<T>,
    /// `‖L u − (K_target − K)‖∞`.
    pub residual: T,
}

fn inf_norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

fn linear_tol<T: Scalar>(rhs: &[T]) -> T {
    let scale = T::one().max(inf_norm(rhs));
    (T::lit(1e-13) * scale).max(T::epsilon() * T::lit(64.0) * scale)
}

/// One linear solve `L u = K_target − K` with the cotangent Laplacian of
/// the input metric.
pub fn solve_linearized<T: Scalar>(
    mesh: &TriangleMesh<T>,
    p: &ConePrescription<T>,
) -> Result<LinearizedSolution<T>, FlattenError> {
    validate_prescription(mesh, p)?;
    let k = defects_with_lengths(mesh, mesh.lengths())?;
    let target = p.target_defects(mesh.n_vertices());
    let rhs: Vec<T> = target.iter().zip(&k).map(|(t, k)| *t - *k).collect();
    let lap = cotan_laplacian(mesh, mesh.lengths());
    let sol = solve_laplacian(&lap, &rhs, linear_tol(&rhs)).map_err(|f| {
        FlattenError::SolverBreakdown {
            residual: f.residual,
        }
    })?;
    Ok(LinearizedSolution {
        factor: ConformalFactor { u: sol.x },
        residual: sol.residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonSolution<T> {
    pub factor: ConformalFactor<T>,
    pub iterations: usize,
    /// `‖K(u) − K_target‖∞` at the returned factor.
    pub residual: T,
    /// Residual before each step, then the final one.
    pub history: Vec<T>,
}

/// Newton iteration on `G(u) = K(u) − K_target`, with the cotangent
/// Laplacian of the current metric as Jacobian. Steps are halved (at most
/// 30 times) until they keep every face valid and reduce `‖G‖∞`. When no
/// step qualifies and some trial broke a triangle inequality, the target
/// lies beyond a degenerate face and [`FlattenError::Degenerate`] names it.
pub fn refine_newton<T: Scalar>(
    mesh: &TriangleMesh<T>,
    p: &ConePrescription<T>,
    u0: &ConformalFactor<T>,
    tol: T,
    max_iter: usize,
) -> Result<NewtonSolution<T>, FlattenError> {
    validate_prescription(mesh, p)?;
    check_len(mesh, &u0.u)?;
    let n = mesh.n_vertices();
    let target = p.target_defects(n);
    let residual_of = |lengths: &[T]| -> Result<(Vec<T>, T), FaceId> {
        if let Some(f) = first_violation(mesh, lengths) {
            return Err(f);
        }
        let k = defects_with_lengths(mesh, lengths).map_err(|e| match e {
            MeshError::TriangleInequality { face, .. } => face,
            _ => 0,
        })?;
        let g: Vec<T> = k.iter().zip(&target).map(|(k, t)| *k - *t).collect();
        let r = inf_norm(&g);
        Ok((g, r))
    };

    let mut u = u0.clone().normalized().u;
    let mut lengths = scaled_lengths(mesh, &u);
    let (mut g, mut r) =
        residual_of(&lengths).map_err(|face| FlattenError::Degenerate { face, iteration: 0 })?;
    let mut history = vec![r];
    for iteration in 0..max_iter {
        if r <= tol {
            return Ok(NewtonSolution {
                factor: ConformalFactor { u },
                iterations: iteration,
                residual: r,
                history,
            });
        }
        let lap = cotan_laplacian(mesh, &lengths);
        let rhs: Vec<T> = g.iter().map(|x| -*x).collect();
        let step = solve_laplacian(&lap, &rhs, linear_tol(&rhs)).map_err(|f| {
            FlattenError::SolverBreakdown {
                residual: f.residual,
            }
        })?;

        let mut t = T::one();
        let mut accepted = None;
        let mut bad_face = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<T> = u.iter().zip(&step.x).map(|(a, d)| *a + t * *d).collect();
            let trial_lengths = scaled_lengths(mesh, &trial);
            match residual_of(&trial_lengths) {
                Ok((g_new, r_new)) if r_new < r => {
                    accepted = Some((trial, trial_lengths, g_new, r_new));
                    break;
                }
                Ok(_) => {}
                Err(face) => {
                    bad_face.get_or_insert(face);
                }
            }
            t *= T::lit(0.5);
        }
        match accepted {
            Some((trial, trial_lengths, g_new, r_new)) => {
                u = ConformalFactor { u: trial }.normalized().u;
                lengths = if u.is_empty() {
                    trial_lengths
                } else {
                    scaled_lengths(mesh, &u)
                };
                g = g_new;
                r = r_new;
                history.push(r);
            }
            None => {
                return Err(match bad_face {
                    Some(face) => FlattenError::Degenerate {
                        face,
                        iteration: iteration + 1,
                    },
                    None => FlattenError::NoConvergence {
                        iterations: iteration + 1,
                        residual: r.to_f64_lossy(),
                    },
                })
            }
        }
    }
    if r <= tol {
        return Ok(NewtonSolution {
            factor: ConformalFactor { u },
            iterations: max_iter,
            residual: r,
            history,
        });
    }
    Err(FlattenError::NoConvergence {
        iterations: max_iter,
        residual: r.to_f64_lossy(),
    })
}

/// Everything produced by [`flatten`].
#[derive(Debug, Clone, PartialEq)]
pub struct Flattening<T> {
    pub cones: Vec<ValidatedCone<T>>,
    pub linearized: LinearizedSolution<T>,
    pub newton: NewtonSolution<T>,
    pub flat_mesh: TriangleMesh<T>,
}

/// Validates, solves the linearized problem, refines with Newton, and
/// applies the resulting factor.
pub fn flatten<T: Scalar>(
    mesh: &TriangleMesh<T>,
    p: &ConePrescription<T>,
    tol: T,
    max_iter: usize,
) -> Result<Flattening<T>, FlattenError> {
    let cones = validate_prescription(mesh, p)?;
    let linearized = solve_linearized(mesh, p)?;
    // The linear step can overshoot into invalid triangles on coarse meshes;
    // fall back to starting Newton from the input metric.
    let start = if first_violation(mesh, &scaled_lengths(mesh, &linearized.factor.u)).is_none() {
        linearized.factor.clone()
    } else {
        ConformalFactor::zero(mesh.n_vertices())
    };
    let newton = refine_newton(mesh, p, &start, tol, max_iter)?;
    let flat_mesh = apply_factor(mesh, &newton.factor)?;
    Ok(Flattening {
        cones,
        linearized,
        newton,
        flat_mesh,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::angle_defects;
    use crate::mesh::shapes;
    use std::f64::consts::PI;

    fn all_marked(m: TriangleMesh<f64>) -> TriangleMesh<f64> {
        let n = m.n_vertices();
        m.with_marked(0..n).unwrap()
    }

    #[test]
    fn sphere_single_negative_cone() {
        let m = all_marked(shapes::icosahedron());
        let p = ConePrescription::new([(0, -2.0 * PI)]);
        let v = validate_prescription(&m, &p).unwrap();
        assert_eq!(v.len(), 1);
        assert!((v[0].theta - 2.0).abs() < 1e-15);
        assert!(v[0].translation_capable);
    }

    #[test]
    fn torus_two_cones() {
        let m = all_marked(shapes::torus_grid(8, 8));
        let p = ConePrescription::new([(0, PI), (10, 3.0 * PI)]);
        let v = validate_prescription(&m, &p).unwrap();
        assert!((v[0].theta - 0.5).abs() < 1e-15);
        assert!((v[1].theta + 0.5).abs() < 1e-15);
        assert!(!v[0].translation_capable && !v[1].translation_capable);
    }

    #[test]
    fn sphere_zero_cone_rejected() {
        let m = all_marked(shapes::icosahedron());
        let p = ConePrescription::new([(0, 0.0)]);
        match validate_prescription(&m, &p).unwrap_err() {
            FlattenError::Inadmissible { total, required, .. } => {
                assert_eq!(total, 0.0);
                assert!((required + 2.0 * PI).abs() < 1e-15);
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn structural_prescription_errors() {
        let m = shapes::tetrahedron::<f64>().with_marked([0, 1]).unwrap();
        let dup = ConePrescription::new([(0, PI), (0, PI)]);
        assert_eq!(
            validate_prescription(&m, &dup),
            Err(FlattenError::DuplicateCone { vertex: 0 })
        );
        let unmarked = ConePrescription::new([(2, PI)]);
        assert_eq!(
            validate_prescription(&m, &unmarked),
            Err(FlattenError::NotMarked { vertex: 2 })
        );
        let missing = ConePrescription::new([(9, PI)]);
        assert_eq!(
            validate_prescription(&m, &missing),
            Err(FlattenError::UnknownVertex { vertex: 9 })
        );
    }

    #[test]
    fn angle_units() {
        assert!((AngleUnit::Turns.to_radians(-1.0f64) + 2.0 * PI).abs() < 1e-15);
        assert!((AngleUnit::Deg.to_radians(180.0f64) - PI).abs() < 1e-15);
        let json: ConePrescriptionJson =
            serde_json::from_str(r#"{"cones":[{"vertex":3,"angle":-1}],"angle_unit":"turns"}"#)
                .unwrap();
        let p: ConePrescription<f64> = json.to_prescription(None);
        assert!((p.cones[0].angle + 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn tetrahedron_already_satisfied() {
        let m = all_marked(shapes::tetrahedron());
        let p = ConePrescription::new((0..4).map(|v| (v, PI)));
        let lin = solve_linearized(&m, &p).unwrap();
        assert!(lin.factor.u.iter().all(|x| x.abs() < 1e-13));
        let newton = refine_newton(&m, &p, &lin.factor, 1e-10, 50).unwrap();
        assert_eq!(newton.iterations, 0);
    }

    #[test]
    fn apply_identity_and_homothety() {
        let m = shapes::icosphere::<f64>(1);
        let same = apply_factor(&m, &ConformalFactor::zero(m.n_vertices())).unwrap();
        assert_eq!(same.lengths(), m.lengths());
        let u = ConformalFactor {
            u: vec![2.0 * 2f64.ln(); m.n_vertices()],
        };
        let doubled = apply_factor(&m, &u).unwrap();
        for (a, b) in doubled.lengths().iter().zip(m.lengths()) {
            assert!((a - 4.0 * b).abs() < 1e-14 || (a - 2.0 * b).abs() < 1e-14);
        }
        let k0 = angle_defects(&m).unwrap().defect;
        let k1 = angle_defects(&doubled).unwrap().defect;
        for (a, b) in k0.iter().zip(&k1) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn apply_factor_reports_face() {
        let m = shapes::tetrahedron::<f64>();
        let u = ConformalFactor {
            u: vec![5.0, -5.0, -5.0, 0.0],
        };
        assert!(matches!(
            apply_factor(&m, &u),
            Err(FlattenError::Mesh(MeshError::TriangleInequality { .. }))
        ));
    }

    #[test]
    fn pushing_a_degree_three_vertex_degenerates() {
        // A vertex with three neighbours cannot exceed total angle 3π.
        let m = all_marked(shapes::tetrahedron());
        let big = 3.5 * PI;
        let rest = (4.0 * PI - big) / 3.0;
        let p = ConePrescription::new([(0, big), (1, rest), (2, rest), (3, rest)]);
        let err = refine_newton(&m, &p, &ConformalFactor::zero(4), 1e-10, 50).unwrap_err();
        assert!(matches!(err, FlattenError::Degenerate { .. }), "{err}");
    }

    #[test]
    fn tetrahedron_reaches_small_cone() {
        let m = all_marked(shapes::tetrahedron());
        let small = 0.5;
        let rest = (4.0 * PI - small) / 3.0;
        let p = ConePrescription::new([(0, small), (1, rest), (2, rest), (3, rest)]);
        let out = flatten(&m, &p, 1e-11, 50).unwrap();
        let k = angle_defects(&out.flat_mesh).unwrap().defect;
        assert!((k[0] - (2.0 * PI - small)).abs() < 1e-10);
    }
}
