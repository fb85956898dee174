//! Closed triangle meshes carrying an intrinsic metric (one length per edge).
//!
//! A [`TriangleMesh`] is validated on construction: every edge lies in
//! exactly two faces, every vertex link is a single cycle, all lengths are
//! positive and finite, and each face satisfies the strict triangle
//! inequality. Meshes need not be consistently oriented.

pub mod io;
pub mod shapes;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::scalar::Scalar;

pub type VertexId = usize;
pub type FaceId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("mesh has no faces")]
    Empty,
    #[error("face {face} is malformed: {reason}")]
    BadFace { face: FaceId, reason: String },
    #[error("edge {}-{} lies in {count} face(s); a closed surface needs exactly 2", edge[0], edge[1])]
    EdgeValence { edge: [VertexId; 2], count: usize },
    #[error("vertex {vertex} is not a manifold vertex (its link is not a single cycle)")]
    NonManifoldVertex { vertex: VertexId },
    #[error("vertex {vertex} is not used by any face")]
    IsolatedVertex { vertex: VertexId },
    #[error("mesh is not connected ({components} components)")]
    Disconnected { components: usize },
    #[error("no length given for edge {}-{}", edge[0], edge[1])]
    MissingLength { edge: [VertexId; 2] },
    #[error("edge {}-{} has invalid length {value}", edge[0], edge[1])]
    BadLength { edge: [VertexId; 2], value: f64 },
    #[error("length table has {got} entries, mesh has {expected} edges")]
    LengthCount { expected: usize, got: usize },
    #[error("face {face} violates the triangle inequality (lengths {lengths:?})")]
    TriangleInequality { face: FaceId, lengths: [f64; 3] },
    #[error("marked vertex {vertex} is out of range")]
    MarkedOutOfRange { vertex: VertexId },
    #[error("mesh is not orientable")]
    NonOrientable,
    #[error("format error: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Closed surface with an edge-length metric and a set of marked vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh<T> {
    n_vertices: usize,
    faces: Vec<[VertexId; 3]>,
    edges: Vec<[VertexId; 2]>,
    edge_lookup: BTreeMap<(VertexId, VertexId), EdgeId>,
    /// `face_edges[f][k]` is the edge opposite corner `k`.
    face_edges: Vec<[EdgeId; 3]>,
    edge_faces: Vec<[FaceId; 2]>,
    lengths: Vec<T>,
    marked: Vec<VertexId>,
}

#[inline]
fn key(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Returns `Some(k)` if `a, b, c` violate the strict triangle inequality,
/// where `k` is the corner whose opposite side is too long.
pub(crate) fn triangle_violation<T: Scalar>(l: [T; 3]) -> Option<usize> {
    (0..3).find(|&k| !(l[k] < l[(k + 1) % 3] + l[(k + 2) % 3]))
}

impl<T: Scalar> TriangleMesh<T> {
    /// Builds a mesh from faces and a per-edge length function `len(i, j)`
    /// (called with `i < j`).
    pub fn from_length_fn<F>(
        faces: Vec<[VertexId; 3]>,
        mut len: F,
        marked: impl IntoIterator<Item = VertexId>,
    ) -> Result<Self, MeshError>
    where
        F: FnMut(VertexId, VertexId) -> T,
    {
        let mut mesh = Self::topology(faces)?;
        let lengths = mesh.edges.iter().map(|e| len(e[0], e[1])).collect();
        mesh.set_marked(marked)?;
        mesh.lengths = lengths;
        mesh.check_lengths()?;
        Ok(mesh)
    }

    /// Builds a mesh from faces and an explicit table keyed by `(min, max)`.
    pub fn from_edge_lengths(
        faces: Vec<[VertexId; 3]>,
        table: &BTreeMap<(VertexId, VertexId), T>,
        marked: impl IntoIterator<Item = VertexId>,
    ) -> Result<Self, MeshError> {
        let mut mesh = Self::topology(faces)?;
        let mut lengths = Vec::with_capacity(mesh.edges.len());
        for e in &mesh.edges {
            match table.get(&(e[0], e[1])) {
                Some(&l) => lengths.push(l),
                None => return Err(MeshError::MissingLength { edge: *e }),
            }
        }
        mesh.set_marked(marked)?;
        mesh.lengths = lengths;
        mesh.check_lengths()?;
        Ok(mesh)
    }

    /// Builds a mesh whose edge lengths are Euclidean distances between
    /// embedded vertex positions.
    pub fn from_positions(
        positions: &[[T; 3]],
        faces: Vec<[VertexId; 3]>,
        marked: impl IntoIterator<Item = VertexId>,
    ) -> Result<Self, MeshError> {
        let n = positions.len();
        if let Some((f, _)) = faces
            .iter()
            .enumerate()
            .find(|(_, f)| f.iter().any(|&v| v >= n))
        {
            return Err(MeshError::BadFace {
                face: f,
                reason: format!("vertex index out of range (have {n} positions)"),
            });
        }
        Self::from_length_fn(
            faces,
            |i, j| {
                let (p, q) = (positions[i], positions[j]);
                ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
            },
            marked,
        )
    }

    /// Same combinatorics and marks, new lengths (indexed by [`EdgeId`]).
    pub fn with_lengths(&self, lengths: Vec<T>) -> Result<Self, MeshError> {
        if lengths.len() != self.edges.len() {
            return Err(MeshError::LengthCount {
                expected: self.edges.len(),
                got: lengths.len(),
            });
        }
        let mut mesh = Self {
            lengths,
            ..self.clone_topology()
        };
        mesh.marked = self.marked.clone();
        mesh.check_lengths()?;
        Ok(mesh)
    }

    /// Same mesh with a different marked set.
    pub fn with_marked(
        &self,
        marked: impl IntoIterator<Item = VertexId>,
    ) -> Result<Self, MeshError> {
        let mut mesh = self.clone();
        mesh.set_marked(marked)?;
        Ok(mesh)
    }

    fn clone_topology(&self) -> Self {
        Self {
            n_vertices: self.n_vertices,
            faces: self.faces.clone(),
            edges: self.edges.clone(),
            edge_lookup: self.edge_lookup.clone(),
            face_edges: self.face_edges.clone(),
            edge_faces: self.edge_faces.clone(),
            lengths: Vec::new(),
            marked: Vec::new(),
        }
    }

    fn set_marked(&mut self, marked: impl IntoIterator<Item = VertexId>) -> Result<(), MeshError> {
        let set: BTreeSet<VertexId> = marked.into_iter().collect();
        if let Some(&v) = set.iter().find(|&&v| v >= self.n_vertices) {
            return Err(MeshError::MarkedOutOfRange { vertex: v });
        }
        self.marked = set.into_iter().collect();
        Ok(())
    }

    fn check_lengths(&self) -> Result<(), MeshError> {
        for (e, &l) in self.lengths.iter().enumerate() {
            if !(l.is_finite() && l > T::zero()) {
                return Err(MeshError::BadLength {
                    edge: self.edges[e],
                    value: l.to_f64_lossy(),
                });
            }
        }
        for f in 0..self.faces.len() {
            let l = self.face_lengths_in(f, &self.lengths);
            if triangle_violation(l).is_some() {
                return Err(MeshError::TriangleInequality {
                    face: f,
                    lengths: l.map(|x| x.to_f64_lossy()),
                });
            }
        }
        Ok(())
    }

    fn topology(faces: Vec<[VertexId; 3]>) -> Result<Self, MeshError> {
        if faces.is_empty() {
            return Err(MeshError::Empty);
        }
        for (f, tri) in faces.iter().enumerate() {
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::BadFace {
                    face: f,
                    reason: format!("repeated vertex in {tri:?}"),
                });
            }
        }
        let n_vertices = faces.iter().flatten().copied().max().unwrap_or(0) + 1;

        let mut edge_lookup = BTreeMap::new();
        let mut edges = Vec::new();
        let mut incident: Vec<Vec<FaceId>> = Vec::new();
        let mut face_edges = Vec::with_capacity(faces.len());
        for (f, tri) in faces.iter().enumerate() {
            let mut fe = [0; 3];
            for k in 0..3 {
                let (a, b) = key(tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let id = *edge_lookup.entry((a, b)).or_insert_with(|| {
                    edges.push([a, b]);
                    incident.push(Vec::new());
                    edges.len() - 1
                });
                incident[id].push(f);
                fe[k] = id;
            }
            face_edges.push(fe);
        }
        let mut edge_faces = Vec::with_capacity(edges.len());
        for (e, inc) in incident.iter().enumerate() {
            if inc.len() != 2 {
                return Err(MeshError::EdgeValence {
                    edge: edges[e],
                    count: inc.len(),
                });
            }
            edge_faces.push([inc[0], inc[1]]);
        }

        // Vertex links: the opposite edges of incident faces must form one cycle.
        let mut link: Vec<Vec<[VertexId; 2]>> = vec![Vec::new(); n_vertices];
        for tri in &faces {
            for k in 0..3 {
                link[tri[k]].push([tri[(k + 1) % 3], tri[(k + 2) % 3]]);
            }
        }
        for (v, segs) in link.iter().enumerate() {
            if segs.is_empty() {
                return Err(MeshError::IsolatedVertex { vertex: v });
            }
            if !is_single_cycle(segs) {
                return Err(MeshError::NonManifoldVertex { vertex: v });
            }
        }

        let mesh = Self {
            n_vertices,
            faces,
            edges,
            edge_lookup,
            face_edges,
            edge_faces,
            lengths: Vec::new(),
            marked: Vec::new(),
        };
        let components = mesh.face_components();
        if components != 1 {
            return Err(MeshError::Disconnected { components });
        }
        Ok(mesh)
    }

    fn face_components(&self) -> usize {
        let mut seen = vec![false; self.faces.len()];
        let mut components = 0;
        for start in 0..self.faces.len() {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(f) = queue.pop_front() {
                for &e in &self.face_edges[f] {
                    for &g in &self.edge_faces[e] {
                        if !seen[g] {
                            seen[g] = true;
                            queue.push_back(g);
                        }
                    }
                }
            }
        }
        components
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn faces(&self) -> &[[VertexId; 3]] {
        &self.faces
    }

    /// Edge endpoints, smaller index first.
    pub fn edges(&self) -> &[[VertexId; 2]] {
        &self.edges
    }

    pub fn lengths(&self) -> &[T] {
        &self.lengths
    }

    pub fn marked(&self) -> &[VertexId] {
        &self.marked
    }

    pub fn is_marked(&self, v: VertexId) -> bool {
        self.marked.binary_search(&v).is_ok()
    }

    pub fn edge_between(&self, a: VertexId, b: VertexId) -> Option<EdgeId> {
        self.edge_lookup.get(&key(a, b)).copied()
    }

    pub fn face_edges(&self, f: FaceId) -> [EdgeId; 3] {
        self.face_edges[f]
    }

    pub fn edge_faces(&self, e: EdgeId) -> [FaceId; 2] {
        self.edge_faces[e]
    }

    /// The face across edge `e` from `f`.
    pub fn opposite_face(&self, f: FaceId, e: EdgeId) -> FaceId {
        let [a, b] = self.edge_faces[e];
        if a == f {
            b
        } else {
            a
        }
    }

    /// Lengths of the sides opposite corners 0, 1, 2 of face `f`.
    pub fn face_lengths(&self, f: FaceId) -> [T; 3] {
        self.face_lengths_in(f, &self.lengths)
    }

    pub(crate) fn face_lengths_in(&self, f: FaceId, lengths: &[T]) -> [T; 3] {
        self.face_edges[f].map(|e| lengths[e])
    }

    /// V − E + F.
    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    /// Faces around `v` in cyclic order. Each entry is `(face, w_in, w_out)`
    /// where consecutive entries share the edge `v–w_out` / `v–w_in`.
    pub fn vertex_cycle(&self, v: VertexId) -> Vec<(FaceId, VertexId, VertexId)> {
        let first = (0..self.faces.len())
            .find(|&f| self.faces[f].contains(&v))
            .expect("validated mesh has no isolated vertices");
        let corner = |f: FaceId| self.faces[f].iter().position(|&x| x == v).unwrap();
        let k = corner(first);
        let tri = self.faces[first];
        let (w_in, mut w_out) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
        let mut out = vec![(first, w_in, w_out)];
        let mut f = first;
        loop {
            let e = self.edge_between(v, w_out).unwrap();
            let g = self.opposite_face(f, e);
            if g == first {
                break;
            }
            let tri = self.faces[g];
            let next = tri.iter().copied().find(|&x| x != v && x != w_out).unwrap();
            out.push((g, w_out, next));
            f = g;
            w_out = next;
        }
        out
    }

    /// Faces with a consistent orientation (face 0 keeps its order), or
    /// [`MeshError::NonOrientable`].
    pub fn oriented_faces(&self) -> Result<Vec<[VertexId; 3]>, MeshError> {
        let mut out: Vec<Option<[VertexId; 3]>> = vec![None; self.faces.len()];
        out[0] = Some(self.faces[0]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(f) = queue.pop_front() {
            let tri = out[f].unwrap();
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let e = self.edge_between(a, b).unwrap();
                let g = self.opposite_face(f, e);
                // The neighbour must traverse the shared edge as b -> a.
                let mut cand = self.faces[g];
                if has_directed(&cand, a, b) {
                    cand.swap(1, 2);
                }
                match out[g] {
                    Some(existing) => {
                        if has_directed(&existing, a, b) {
                            return Err(MeshError::NonOrientable);
                        }
                    }
                    None => {
                        out[g] = Some(cand);
                        queue.push_back(g);
                    }
                }
            }
        }
        Ok(out.into_iter().map(Option::unwrap).collect())
    }

    pub fn is_orientable(&self) -> bool {
        self.oriented_faces().is_ok()
    }

    /// Copy with faces replaced by a consistent orientation.
    pub fn oriented(&self) -> Result<Self, MeshError> {
        let faces = self.oriented_faces()?;
        let lengths = self.lengths.clone();
        let edges = self.edges.clone();
        let table: BTreeMap<_, _> = edges
            .iter()
            .zip(lengths)
            .map(|(e, l)| ((e[0], e[1]), l))
            .collect();
        Self::from_edge_lengths(faces, &table, self.marked.iter().copied())
    }
}

fn has_directed(tri: &[VertexId; 3], a: VertexId, b: VertexId) -> bool {
    (0..3).any(|k| tri[k] == a && tri[(k + 1) % 3] == b)
}

fn is_single_cycle(segs: &[[VertexId; 2]]) -> bool {
    let mut adj: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for s in segs {
        adj.entry(s[0]).or_default().push(s[1]);
        adj.entry(s[1]).or_default().push(s[0]);
    }
    if adj.values().any(|n| n.len() != 2) || adj.len() != segs.len() {
        return false;
    }
    let start = *adj.keys().next().unwrap();
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        for &y in &adj[&x] {
            if seen.insert(y) {
                stack.push(y);
            }
        }
    }
    seen.len() == adj.len()
}
