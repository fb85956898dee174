//! Angle defects (discrete Gaussian curvature) and the discrete Gauss–Bonnet check.

use crate::mesh::{triangle_violation, MeshError, TriangleMesh};
use crate::scalar::Scalar;

/// Per-vertex angle defect `2π − Σ interior angles`, in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField<T> {
    pub defect: Vec<T>,
}

impl<T: Scalar> CurvatureField<T> {
    pub fn total(&self) -> T {
        neumaier_sum(self.defect.iter().copied())
    }
}

/// Compensated summation, independent of magnitude ordering.
pub fn neumaier_sum<T: Scalar>(xs: impl IntoIterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut c = T::zero();
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Angle opposite side `a` in a triangle with sides `a, b, c`; the cosine
/// is clamped to `[-1, 1]`.
#[inline]
pub fn opposite_angle<T: Scalar>(a: T, b: T, c: T) -> T {
    let cos = (b * b + c * c - a * a) / (T::lit(2.0) * b * c);
    cos.max(-T::one()).min(T::one()).acos()
}

/// Interior angles at corners 0, 1, 2 given the lengths opposite them.
#[inline]
pub fn corner_angles<T: Scalar>(l: [T; 3]) -> [T; 3] {
    [
        opposite_angle(l[0], l[1], l[2]),
        opposite_angle(l[1], l[2], l[0]),
        opposite_angle(l[2], l[0], l[1]),
    ]
}

/// Cotangent of the angle opposite side `a`, from side lengths.
#[inline]
pub fn opposite_cot<T: Scalar>(a: T, b: T, c: T) -> T {
    // cot = (b² + c² − a²) / (4·area), area by Heron in the stable ordering.
    let num = b * b + c * c - a * a;
    num / (T::lit(4.0) * triangle_area(a, b, c))
}

/// Triangle area from side lengths (Kahan's formula).
pub fn triangle_area<T: Scalar>(a: T, b: T, c: T) -> T {
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let [a, b, c] = s;
    let p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    T::lit(0.25) * p.max(T::zero()).sqrt()
}

pub(crate) fn defects_with_lengths<T: Scalar>(
    mesh: &TriangleMesh<T>,
    lengths: &[T],
) -> Result<Vec<T>, MeshError> {
    let mut sums: Vec<Vec<T>> = vec![Vec::new(); mesh.n_vertices()];
    for (f, tri) in mesh.faces().iter().enumerate() {
        let l = mesh.face_lengths_in(f, lengths);
        if triangle_violation(l).is_some() {
            return Err(MeshError::TriangleInequality {
                face: f,
                lengths: l.map(|x| x.to_f64_lossy()),
            });
        }
        let ang = corner_angles(l);
        for k in 0..3 {
            sums[tri[k]].push(ang[k]);
        }
    }
    Ok(sums
        .into_iter()
        .map(|a| T::two_pi() - neumaier_sum(a))
        .collect())
}

pub fn angle_defects<T: Scalar>(mesh: &TriangleMesh<T>) -> Result<CurvatureField<T>, MeshError> {
    Ok(CurvatureField {
        defect: defects_with_lengths(mesh, mesh.lengths())?,
    })
}

/// `|Σ defects − 2πχ|`.
pub fn check_gauss_bonnet<T: Scalar>(mesh: &TriangleMesh<T>) -> Result<T, MeshError> {
    let total = angle_defects(mesh)?.total();
    let chi = T::lit(mesh.euler_characteristic() as f64);
    Ok((total - T::two_pi() * chi).abs())
}
