//! Cotangent-weight Laplacian of an edge-length metric.

use crate::curvature::opposite_cot;
use crate::mesh::TriangleMesh;
use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;

/// Per-edge weights `(cot α + cot β) / 2`, α and β the angles opposite the
/// edge in its two faces.
pub fn cotan_weights<T: Scalar>(mesh: &TriangleMesh<T>, lengths: &[T]) -> Vec<T> {
    let mut w = vec![T::zero(); mesh.n_edges()];
    let half = T::lit(0.5);
    for f in 0..mesh.n_faces() {
        let l = mesh.face_lengths_in(f, lengths);
        let fe = mesh.face_edges(f);
        for k in 0..3 {
            w[fe[k]] += half * opposite_cot(l[k], l[(k + 1) % 3], l[(k + 2) % 3]);
        }
    }
    w
}

/// Positive semi-definite Laplacian: `L_ii = Σ_j w_ij`, `L_ij = −w_ij`.
/// It is the Jacobian of the angle defects with respect to logarithmic
/// vertex scale factors.
pub fn cotan_laplacian<T: Scalar>(mesh: &TriangleMesh<T>, lengths: &[T]) -> CsrMatrix<T> {
    let w = cotan_weights(mesh, lengths);
    let mut t = Vec::with_capacity(4 * w.len());
    for (e, &[i, j]) in mesh.edges().iter().enumerate() {
        t.push((i, i, w[e]));
        t.push((j, j, w[e]));
        t.push((i, j, -w[e]));
        t.push((j, i, -w[e]));
    }
    CsrMatrix::from_triplets(mesh.n_vertices(), t)
}
