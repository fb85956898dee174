//! Developing a flat cone mesh into the plane and reading off holonomy.
//!
//! Faces are unfolded one at a time across shared edges. Unfolding around a
//! closed loop of faces brings the first face back moved by a rigid motion;
//! its inverse is the holonomy of the loop. For a loop running
//! counter-clockwise around a region, the rotation part equals the total
//! angle defect enclosed (mod 2π).

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::curvature::corner_angles;
use crate::mesh::{FaceId, MeshError, TriangleMesh, VertexId};
use crate::motion::RigidMotion;
use crate::scalar::{cplx, Cplx, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DevelopError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("base face {face} is out of range ({faces} faces)")]
    BadBaseFace { face: FaceId, faces: usize },
    #[error("vertex {0} is out of range")]
    BadVertex(VertexId),
    #[error("faces {0} and {1} are not adjacent")]
    NotAdjacent(FaceId, FaceId),
    #[error("face loop is empty")]
    EmptyLoop,
    #[error("region boundary is not a single loop of faces: {0}")]
    BadRegion(String),
    #[error("layout is empty; nothing to draw")]
    NothingToDraw,
    #[error("i/o error: {0}")]
    Io(String),
}

/// Planar positions of every face's corners, laid out along a BFS spanning
/// tree of the dual graph.
#[derive(Debug, Clone, PartialEq)]
pub struct DevelopedLayout<T> {
    base_face: FaceId,
    /// Consistently oriented faces; corner `k` of face `f` sits at
    /// `positions[f][k]`.
    faces: Vec<[VertexId; 3]>,
    positions: Vec<[Cplx<T>; 3]>,
    /// Tree parent of each face; `None` for the base face.
    parent: Vec<Option<FaceId>>,
    /// Faces in the order they were unfolded.
    order: Vec<FaceId>,
}

impl<T: Scalar> DevelopedLayout<T> {
    pub fn base_face(&self) -> FaceId {
        self.base_face
    }

    pub fn faces(&self) -> &[[VertexId; 3]] {
        &self.faces
    }

    pub fn positions(&self) -> &[[Cplx<T>; 3]] {
        &self.positions
    }

    pub fn parent(&self, f: FaceId) -> Option<FaceId> {
        self.parent[f]
    }

    pub fn order(&self) -> &[FaceId] {
        &self.order
    }

    /// Position of vertex `v` as a corner of face `f`.
    pub fn corner(&self, f: FaceId, v: VertexId) -> Option<Cplx<T>> {
        let k = self.faces[f].iter().position(|&w| w == v)?;
        Some(self.positions[f][k])
    }

    /// Tree edges as `(child, parent)` pairs.
    pub fn tree_edges(&self) -> impl Iterator<Item = (FaceId, FaceId)> + '_ {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(f, p)| p.map(|p| (f, p)))
    }

    /// Largest distance between the two placements of a shared edge's
    /// endpoints, over the given face pair.
    pub fn seam_mismatch(&self, f: FaceId, g: FaceId) -> Option<T> {
        let shared: Vec<VertexId> = self.faces[f]
            .iter()
            .copied()
            .filter(|v| self.faces[g].contains(v))
            .collect();
        if shared.len() != 2 {
            return None;
        }
        Some(
            shared
                .iter()
                .map(|&v| (self.corner(f, v).unwrap() - self.corner(g, v).unwrap()).norm())
                .fold(T::zero(), T::max),
        )
    }
}

/// Corner order of `tri` rotated so that it starts at `v`.
fn rotate_to<T: Copy + PartialEq>(tri: [T; 3], v: T) -> Option<[T; 3]> {
    let k = tri.iter().position(|&w| w == v)?;
    Some([tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]])
}

fn face_length<T: Scalar>(mesh: &TriangleMesh<T>, a: VertexId, b: VertexId) -> T {
    mesh.lengths()[mesh.edge_between(a, b).expect("edge of a face")]
}

/// Places the oriented triangle `(a, b, c)` with `a`, `b` at the given
/// points and `c` to the left of `a → b`.
fn place_third<T: Scalar>(
    mesh: &TriangleMesh<T>,
    tri: [VertexId; 3],
    pa: Cplx<T>,
    pb: Cplx<T>,
) -> Cplx<T> {
    let [a, b, c] = tri;
    let l = [
        face_length(mesh, b, c),
        face_length(mesh, c, a),
        face_length(mesh, a, b),
    ];
    let angle_a = corner_angles(l)[0];
    let dir = (pb - pa) / (pb - pa).norm();
    pa + dir * Cplx::from_polar(l[1], angle_a)
}

/// Oriented faces with face `base` keeping its input corner order.
fn orient_from<T: Scalar>(mesh: &TriangleMesh<T>, base: FaceId) -> Result<Vec<[VertexId; 3]>, MeshError> {
    let mut faces = mesh.oriented_faces()?;
    if faces[base] != mesh.faces()[base] {
        for f in &mut faces {
            f.swap(1, 2);
        }
    }
    Ok(faces)
}

/// Face across the directed edge `a → b` of an oriented face, i.e. the face
/// containing `b → a`.
fn across<T: Scalar>(mesh: &TriangleMesh<T>, f: FaceId, a: VertexId, b: VertexId) -> FaceId {
    let e = mesh.edge_between(a, b).expect("edge of a face");
    mesh.opposite_face(f, e)
}

/// Unfolds `mesh` into the plane. The base face gets its first vertex at 0,
/// its first edge along the positive real axis and its third vertex in the
/// upper half plane; the rest follow by BFS with lowest-index tie-breaking.
pub fn layout<T: Scalar>(mesh: &TriangleMesh<T>, base_face: FaceId) -> Result<DevelopedLayout<T>, DevelopError> {
    let nf = mesh.n_faces();
    if base_face >= nf {
        return Err(DevelopError::BadBaseFace {
            face: base_face,
            faces: nf,
        });
    }
    let faces = orient_from(mesh, base_face)?;
    let zero = cplx(T::zero(), T::zero());
    let mut positions = vec![[zero; 3]; nf];
    let mut parent = vec![None; nf];
    let mut placed = vec![false; nf];
    let mut order = Vec::with_capacity(nf);

    let [a, b, c] = faces[base_face];
    let pb = cplx(face_length(mesh, a, b), T::zero());
    positions[base_face] = [zero, pb, place_third(mesh, [a, b, c], zero, pb)];
    placed[base_face] = true;
    let mut queue = VecDeque::from([base_face]);
    while let Some(f) = queue.pop_front() {
        order.push(f);
        let mut next: Vec<(FaceId, usize)> = (0..3)
            .map(|k| {
                let (u, v) = (faces[f][k], faces[f][(k + 1) % 3]);
                (across(mesh, f, u, v), k)
            })
            .filter(|&(g, _)| !placed[g])
            .collect();
        next.sort();
        next.dedup_by_key(|x| x.0);
        for (g, k) in next {
            let (u, v) = (faces[f][k], faces[f][(k + 1) % 3]);
            let (pu, pv) = (positions[f][k], positions[f][(k + 1) % 3]);
            // g traverses the shared edge as v → u.
            let tri = rotate_to(faces[g], v).expect("shared vertex");
            debug_assert_eq!(tri[1], u);
            let pw = place_third(mesh, tri, pv, pu);
            let mut pos = [zero; 3];
            for (i, &w) in faces[g].iter().enumerate() {
                pos[i] = if w == v {
                    pv
                } else if w == u {
                    pu
                } else {
                    pw
                };
            }
            positions[g] = pos;
            parent[g] = Some(f);
            placed[g] = true;
            queue.push_back(g);
        }
    }
    Ok(DevelopedLayout {
        base_face,
        faces,
        positions,
        parent,
        order,
    })
}

/// Holonomy of a closed walk `f_0, f_1, …, f_{k−1}` of faces (consecutive
/// faces adjacent, `f_{k−1}` adjacent to `f_0`), in the frame of `f_0`'s
/// layout position.
pub fn holonomy_along<T: Scalar>(
    mesh: &TriangleMesh<T>,
    layout: &DevelopedLayout<T>,
    walk: &[FaceId],
) -> Result<RigidMotion<T>, DevelopError> {
    let first = *walk.first().ok_or(DevelopError::EmptyLoop)?;
    let faces = &layout.faces;
    let mut cur = first;
    let mut pos = layout.positions[first];
    let zero = cplx(T::zero(), T::zero());
    for &g in walk.iter().skip(1).chain(std::iter::once(&first)) {
        let shared: Vec<usize> = (0..3).filter(|&k| faces[g].contains(&faces[cur][k])).collect();
        if shared.len() != 2 || g == cur {
            return Err(DevelopError::NotAdjacent(cur, g));
        }
        // Directed edge u → v of `cur`; g holds it as v → u.
        let k = if (shared[0] + 1) % 3 == shared[1] {
            shared[0]
        } else {
            shared[1]
        };
        let (u, v) = (faces[cur][k], faces[cur][(k + 1) % 3]);
        let (pu, pv) = (pos[k], pos[(k + 1) % 3]);
        let tri = rotate_to(faces[g], v).expect("shared vertex");
        let pw = place_third(mesh, tri, pv, pu);
        let mut next = [zero; 3];
        for (i, &w) in faces[g].iter().enumerate() {
            next[i] = if w == v {
                pv
            } else if w == u {
                pu
            } else {
                pw
            };
        }
        pos = next;
        cur = g;
    }
    let orig = layout.positions[first];
    let develop = RigidMotion::from_point_pairs(orig[0], orig[1], pos[0], pos[1]);
    Ok(develop.inverse())
}

/// Faces with vertices on both sides of `inside`, in counter-clockwise
/// order around the inside region (relative to the layout orientation),
/// starting from the lowest face index.
pub fn boundary_face_loop<T: Scalar>(
    mesh: &TriangleMesh<T>,
    layout: &DevelopedLayout<T>,
    inside: &[VertexId],
) -> Result<Vec<FaceId>, DevelopError> {
    let n = mesh.n_vertices();
    let mut is_in = vec![false; n];
    for &v in inside {
        if v >= n {
            return Err(DevelopError::BadVertex(v));
        }
        is_in[v] = true;
    }
    let faces = &layout.faces;
    let strip: Vec<FaceId> = (0..faces.len())
        .filter(|&f| {
            let k = faces[f].iter().filter(|&&v| is_in[v]).count();
            k == 1 || k == 2
        })
        .collect();
    let start = *strip
        .first()
        .ok_or_else(|| DevelopError::BadRegion("no face straddles the region boundary".into()))?;
    // Leave each face through its outside → inside edge; the region is then
    // on the left of the direction of travel.
    let exit = |f: FaceId| -> FaceId {
        let k = (0..3)
            .find(|&k| !is_in[faces[f][k]] && is_in[faces[f][(k + 1) % 3]])
            .expect("straddling face has an outside → inside edge");
        across(mesh, f, faces[f][k], faces[f][(k + 1) % 3])
    };
    let mut walk = vec![start];
    let mut cur = exit(start);
    while cur != start {
        if walk.len() > strip.len() {
            return Err(DevelopError::BadRegion("boundary walk does not close".into()));
        }
        walk.push(cur);
        cur = exit(cur);
    }
    if walk.len() != strip.len() {
        return Err(DevelopError::BadRegion(format!(
            "boundary has several components ({} of {} straddling faces on the first loop)",
            walk.len(),
            strip.len()
        )));
    }
    Ok(walk)
}

/// Holonomy of the loop of faces around `vertex`.
pub fn holonomy_around<T: Scalar>(
    mesh: &TriangleMesh<T>,
    layout: &DevelopedLayout<T>,
    vertex: VertexId,
) -> Result<RigidMotion<T>, DevelopError> {
    let walk = boundary_face_loop(mesh, layout, &[vertex])?;
    holonomy_along(mesh, layout, &walk)
}

/// A text label attached to a vertex in the SVG output.
#[derive(Debug, Clone, PartialEq)]
pub struct SvgLabel {
    pub vertex: VertexId,
    pub text: String,
}

/// SVG drawing of the layout: one polygon per face, marked vertices as red
/// dots at each of their placements, labels next to the first placement.
pub fn svg_string<T: Scalar>(
    mesh: &TriangleMesh<T>,
    layout: &DevelopedLayout<T>,
    labels: &[SvgLabel],
) -> Result<String, DevelopError> {
    if layout.positions.is_empty() {
        return Err(DevelopError::NothingToDraw);
    }
    let pts: Vec<(f64, f64)> = layout
        .positions
        .iter()
        .flatten()
        .map(|p| (p.re.to_f64_lossy(), -p.im.to_f64_lossy()))
        .collect();
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let pad = 0.05 * span;
    let stroke = span / 500.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#,
        x0 - pad,
        y0 - pad,
        x1 - x0 + 2.0 * pad,
        y1 - y0 + 2.0 * pad
    );
    for (f, tri) in layout.positions.iter().enumerate() {
        let coords: Vec<String> = tri
            .iter()
            .map(|p| format!("{},{}", p.re.to_f64_lossy(), -p.im.to_f64_lossy()))
            .collect();
        let _ = writeln!(
            s,
            r##"<polygon data-face="{f}" points="{}" fill="#e8eef7" stroke="#335" stroke-width="{stroke}"/>"##,
            coords.join(" ")
        );
    }
    for &v in mesh.marked() {
        for (f, tri) in layout.faces.iter().enumerate() {
            if let Some(k) = tri.iter().position(|&w| w == v) {
                let p = layout.positions[f][k];
                let _ = writeln!(
                    s,
                    r#"<circle data-vertex="{v}" cx="{}" cy="{}" r="{}" fill="red"/>"#,
                    p.re.to_f64_lossy(),
                    -p.im.to_f64_lossy(),
                    4.0 * stroke
                );
            }
        }
    }
    for label in labels {
        let at = layout
            .faces
            .iter()
            .enumerate()
            .find_map(|(f, tri)| layout.corner(f, label.vertex).filter(|_| tri.contains(&label.vertex)));
        if let Some(p) = at {
            let text = label
                .text
                .replace('&', "&amp;")
                .replace('<', "&lt;")
                .replace('>', "&gt;");
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="{}">{text}</text>"#,
                p.re.to_f64_lossy() + 6.0 * stroke,
                -p.im.to_f64_lossy(),
                12.0 * stroke
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_svg<T: Scalar>(
    mesh: &TriangleMesh<T>,
    layout: &DevelopedLayout<T>,
    labels: &[SvgLabel],
    path: &Path,
) -> Result<(), DevelopError> {
    let s = svg_string(mesh, layout, labels)?;
    std::fs::write(path, s).map_err(|e| DevelopError::Io(format!("{}: {e}", path.display())))
}
