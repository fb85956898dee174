//! Standard test surfaces.

use std::collections::BTreeMap;

use crate::mesh::{MeshError, TriangleMesh, VertexId};
use crate::quadrature::gauss_legendre;
use crate::scalar::{cplx, Cplx, Scalar};

/// Regular tetrahedron with unit edges.
pub fn tetrahedron<T: Scalar>() -> TriangleMesh<T> {
    let faces = vec![[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]];
    TriangleMesh::from_length_fn(faces, |_, _| T::one(), []).expect("valid tetrahedron")
}

fn icosahedron_raw<T: Scalar>() -> (Vec<[T; 3]>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let positions = raw
        .iter()
        .map(|p| {
            let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            [T::lit(p[0] / n), T::lit(p[1] / n), T::lit(p[2] / n)]
        })
        .collect();
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (positions, faces)
}

/// Regular icosahedron inscribed in the unit sphere.
pub fn icosahedron<T: Scalar>() -> TriangleMesh<T> {
    let (p, f) = icosahedron_raw::<T>();
    TriangleMesh::from_positions(&p, f, []).expect("valid icosahedron")
}

/// Vertex positions and faces of the icosahedron subdivided `level` times,
/// projected to the unit sphere.
pub fn icosphere_geometry<T: Scalar>(level: usize) -> (Vec<[T; 3]>, Vec<[usize; 3]>) {
    let (mut pos, mut faces) = icosahedron_raw::<T>();
    for _ in 0..level {
        let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for tri in &faces {
            let mut mid = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                mid[k] = *midpoint.entry(key).or_insert_with(|| {
                    let m = [0, 1, 2].map(|i| pos[a][i] + pos[b][i]);
                    let n = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
                    pos.push(m.map(|x| x / n));
                    pos.len() - 1
                });
            }
            next.push([tri[0], mid[0], mid[2]]);
            next.push([tri[1], mid[1], mid[0]]);
            next.push([tri[2], mid[2], mid[1]]);
            next.push(mid);
        }
        faces = next;
    }
    (pos, faces)
}

/// Icosphere with chord edge lengths.
pub fn icosphere<T: Scalar>(level: usize) -> TriangleMesh<T> {
    let (p, f) = icosphere_geometry::<T>(level);
    TriangleMesh::from_positions(&p, f, []).expect("valid icosphere")
}

/// For each direction, the vertex whose position has the largest dot
/// product with it (lowest index on ties).
pub fn nearest_vertices<T: Scalar>(positions: &[[T; 3]], directions: &[[T; 3]]) -> Vec<VertexId> {
    directions
        .iter()
        .map(|d| {
            let mut best = 0;
            let mut best_dot = T::neg_infinity();
            for (i, p) in positions.iter().enumerate() {
                let dot = p[0] * d[0] + p[1] * d[1] + p[2] * d[2];
                if dot > best_dot {
                    best_dot = dot;
                    best = i;
                }
            }
            best
        })
        .collect()
}

/// Level-`level` icosphere with the four vertices closest to the directions
/// of a regular inscribed tetrahedron marked.
pub fn icosphere_with_tetrahedral_marks<T: Scalar>(
    level: usize,
) -> (TriangleMesh<T>, [VertexId; 4]) {
    let (p, f) = icosphere_geometry::<T>(level);
    let one = T::one();
    let dirs = [
        [one, one, one],
        [one, -one, -one],
        [-one, one, -one],
        [-one, -one, one],
    ];
    let near = nearest_vertices(&p, &dirs);
    let marks = [near[0], near[1], near[2], near[3]];
    let mesh = TriangleMesh::from_positions(&p, f, marks).expect("valid icosphere");
    (mesh, marks)
}

/// `rows × cols` torus grid with unit edges: every vertex has six
/// equilateral triangles, so the metric is flat.
pub fn torus_grid<T: Scalar>(rows: usize, cols: usize) -> TriangleMesh<T> {
    assert!(rows >= 3 && cols >= 3, "torus grid needs at least 3x3");
    let idx = |i: usize, j: usize| (i % rows) * cols + (j % cols);
    let mut faces = Vec::with_capacity(2 * rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    TriangleMesh::from_length_fn(faces, |_, _| T::one(), []).expect("valid torus")
}

/// Genus-two surface: connected sum of two 4×4 torus grids, unit edges.
pub fn genus_two<T: Scalar>() -> TriangleMesh<T> {
    let a = torus_grid::<T>(4, 4);
    let n = a.n_vertices();
    let removed = a.faces()[0];
    let mut faces: Vec<[usize; 3]> = a.faces()[1..].to_vec();
    // Second copy: identify its copy of the removed triangle with the first
    // one, reversed so the result stays orientable.
    let glue = |v: usize| -> usize {
        if v == removed[0] {
            removed[0]
        } else if v == removed[1] {
            removed[2]
        } else if v == removed[2] {
            removed[1]
        } else {
            v + n
        }
    };
    for tri in &a.faces()[1..] {
        faces.push([glue(tri[0]), glue(tri[2]), glue(tri[1])]);
    }
    // Compact vertex numbering (the glued copies leave holes).
    let mut used: Vec<usize> = faces.iter().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();
    let remap: BTreeMap<usize, usize> = used.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let faces = faces.into_iter().map(|t| t.map(|v| remap[&v])).collect();
    TriangleMesh::from_length_fn(faces, |_, _| T::one(), []).expect("valid genus-2 surface")
}

/// Six-vertex real projective plane (non-orientable, χ = 1), unit edges.
pub fn projective_plane<T: Scalar>() -> TriangleMesh<T> {
    let faces = vec![
        [0, 1, 2],
        [0, 2, 3],
        [0, 3, 4],
        [0, 4, 5],
        [0, 5, 1],
        [1, 2, 4],
        [2, 3, 5],
        [3, 4, 1],
        [4, 5, 2],
        [5, 1, 3],
    ];
    TriangleMesh::from_length_fn(faces, |_, _| T::one(), []).expect("valid RP2")
}

/// Double cone over a `sides`-gon: both apexes (vertices 0 and 1) have total
/// angle `cone_angle`, built from isosceles triangles with unit legs.
/// Both apexes are marked.
pub fn bipyramid<T: Scalar>(sides: usize, cone_angle: T) -> Result<TriangleMesh<T>, MeshError> {
    assert!(sides >= 3);
    let apex = cone_angle / T::from_usize_lossy(sides);
    let base = T::lit(2.0) * (apex / T::lit(2.0)).sin();
    let ring = |j: usize| 2 + j % sides;
    let mut faces = Vec::new();
    for j in 0..sides {
        faces.push([0, ring(j), ring(j + 1)]);
        faces.push([1, ring(j + 1), ring(j)]);
    }
    TriangleMesh::from_length_fn(faces, |a, _| if a <= 1 { T::one() } else { base }, [0, 1])
}

/// How an annulus edge gets its length from `μ = f(z) dz`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeRule {
    /// `|∫ μ|` along the segment: the geodesic distance of the flat metric
    /// `|μ|²` between nearby points.
    GeodesicChord,
    /// `∫ |μ|` along the straight segment in `z`, an overestimate of the
    /// geodesic distance by `O(h³)` per edge.
    MetricChord,
}

/// Closed mesh sampled from a flat metric `|f(z) dz|²` on the
/// annulus `r_in ≤ |z| ≤ r_out`, with each boundary circle coned off to an
/// extra marked vertex.
#[derive(Debug, Clone)]
pub struct SampledAnnulus<T> {
    pub mesh: TriangleMesh<T>,
    /// Sample position of each annulus vertex; the two caps have none.
    pub positions: Vec<Cplx<T>>,
    pub inner_cap: VertexId,
    pub outer_cap: VertexId,
    /// Vertices on `|z| = r_in`, in counter-clockwise order.
    pub inner_ring: Vec<VertexId>,
    pub radial_steps: usize,
    pub sectors: usize,
}

/// Triangulates the annulus on a polar grid whose spacing is about `h` at
/// the inner circle. Edge lengths follow `rule`, integrated along the
/// straight segment with 8-point Gauss–Legendre.
pub fn sampled_annulus<T: Scalar, F: Fn(Cplx<T>) -> Cplx<T>>(
    r_in: T,
    r_out: T,
    h: T,
    rule: EdgeRule,
    form: F,
) -> Result<SampledAnnulus<T>, MeshError> {
    let radial_steps = ((r_out - r_in) / h).ceil().to_usize().unwrap_or(1).max(1);
    let sectors = (T::two_pi() * r_in / h).ceil().to_usize().unwrap_or(8).max(8);
    let idx = |i: usize, j: usize| i * sectors + (j % sectors);
    let mut positions = Vec::with_capacity((radial_steps + 1) * sectors);
    for i in 0..=radial_steps {
        let r = r_in + (r_out - r_in) * T::from_usize_lossy(i) / T::from_usize_lossy(radial_steps);
        for j in 0..sectors {
            let a = T::two_pi() * T::from_usize_lossy(j) / T::from_usize_lossy(sectors);
            positions.push(cplx(r * a.cos(), r * a.sin()));
        }
    }
    let inner_cap = positions.len();
    let outer_cap = inner_cap + 1;
    let mut faces = Vec::new();
    for i in 0..radial_steps {
        for j in 0..sectors {
            faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    for j in 0..sectors {
        faces.push([inner_cap, idx(0, j + 1), idx(0, j)]);
        faces.push([outer_cap, idx(radial_steps, j), idx(radial_steps, j + 1)]);
    }

    let (nodes, weights) = gauss_legendre::<T>(8);
    let half = T::lit(0.5);
    let segment = |a: Cplx<T>, b: Cplx<T>| {
        let mid = (a + b) * half;
        let dir = (b - a) * half;
        match rule {
            EdgeRule::GeodesicChord => {
                let mut s = cplx(T::zero(), T::zero());
                for (x, w) in nodes.iter().zip(&weights) {
                    s += form(mid + dir * *x) * *w;
                }
                (s * dir).norm()
            }
            EdgeRule::MetricChord => {
                let mut s = T::zero();
                for (x, w) in nodes.iter().zip(&weights) {
                    s += *w * form(mid + dir * *x).norm();
                }
                s * dir.norm()
            }
        }
    };
    let ring_max = |i: usize| {
        (0..sectors)
            .map(|j| segment(positions[idx(i, j)], positions[idx(i, j + 1)]))
            .fold(T::zero(), T::max)
    };
    let inner_spoke = ring_max(0);
    let outer_spoke = ring_max(radial_steps);
    let mesh = TriangleMesh::from_length_fn(
        faces,
        |a, b| {
            if b == inner_cap {
                inner_spoke
            } else if b == outer_cap {
                outer_spoke
            } else {
                segment(positions[a], positions[b])
            }
        },
        [inner_cap, outer_cap],
    )?;
    Ok(SampledAnnulus {
        mesh,
        positions,
        inner_cap,
        outer_cap,
        inner_ring: (0..sectors).collect(),
        radial_steps,
        sectors,
    })
}
