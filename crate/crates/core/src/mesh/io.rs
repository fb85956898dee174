//! Mesh ingestion and export: Wavefront OBJ and the JSON edge-length format
//! `{"faces": [[i,j,k],…], "edge_lengths": {"i-j": ℓ,…}, "marked": [...]}`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::mesh::{MeshError, TriangleMesh, VertexId};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshJson {
    pub faces: Vec<[VertexId; 3]>,
    pub edge_lengths: BTreeMap<String, f64>,
    #[serde(default)]
    pub marked: Vec<VertexId>,
}

fn parse_edge_key(k: &str) -> Result<(VertexId, VertexId), MeshError> {
    let bad = || MeshError::Format(format!("edge key {k:?} is not of the form \"i-j\""));
    let (a, b) = k.split_once('-').ok_or_else(bad)?;
    let a: VertexId = a.trim().parse().map_err(|_| bad())?;
    let b: VertexId = b.trim().parse().map_err(|_| bad())?;
    Ok((a.min(b), a.max(b)))
}

impl MeshJson {
    pub fn into_mesh<T: Scalar>(self) -> Result<TriangleMesh<T>, MeshError> {
        let mut table = BTreeMap::new();
        for (k, v) in &self.edge_lengths {
            let key = parse_edge_key(k)?;
            if table.insert(key, T::lit(*v)).is_some() {
                return Err(MeshError::Format(format!("edge {}-{} given twice", key.0, key.1)));
            }
        }
        TriangleMesh::from_edge_lengths(self.faces, &table, self.marked)
    }

    pub fn from_mesh<T: Scalar>(mesh: &TriangleMesh<T>) -> Self {
        let edge_lengths = mesh
            .edges()
            .iter()
            .zip(mesh.lengths())
            .map(|(e, l)| (format!("{}-{}", e[0], e[1]), l.to_f64_lossy()))
            .collect();
        Self {
            faces: mesh.faces().to_vec(),
            edge_lengths,
            marked: mesh.marked().to_vec(),
        }
    }
}

pub fn parse_json<T: Scalar>(text: &str) -> Result<TriangleMesh<T>, MeshError> {
    let raw: MeshJson =
        serde_json::from_str(text).map_err(|e| MeshError::Format(format!("mesh JSON: {e}")))?;
    raw.into_mesh()
}

/// Parses `v` and `f` records. Face indices are 1-based (negative values
/// count from the end); polygons are fan-triangulated. Other records are
/// ignored.
pub fn parse_obj<T: Scalar>(
    text: &str,
    marked: impl IntoIterator<Item = VertexId>,
) -> Result<TriangleMesh<T>, MeshError> {
    let mut positions: Vec<[T; 3]> = Vec::new();
    let mut faces = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                let mut p = [T::zero(); 3];
                for c in p.iter_mut() {
                    let s = tok.next().ok_or_else(|| {
                        MeshError::Format(format!("line {}: vertex needs 3 coordinates", lineno + 1))
                    })?;
                    let x: f64 = s.parse().map_err(|_| {
                        MeshError::Format(format!("line {}: bad coordinate {s:?}", lineno + 1))
                    })?;
                    *c = T::lit(x);
                }
                positions.push(p);
            }
            Some("f") => {
                let mut poly = Vec::new();
                for s in tok {
                    let head = s.split('/').next().unwrap_or("");
                    let i: i64 = head.parse().map_err(|_| {
                        MeshError::Format(format!("line {}: bad face index {s:?}", lineno + 1))
                    })?;
                    let n = positions.len() as i64;
                    let idx = if i > 0 { i - 1 } else { n + i };
                    if i == 0 || idx < 0 {
                        return Err(MeshError::Format(format!(
                            "line {}: face index {i} out of range",
                            lineno + 1
                        )));
                    }
                    poly.push(idx as VertexId);
                }
                if poly.len() < 3 {
                    return Err(MeshError::Format(format!(
                        "line {}: face needs at least 3 vertices",
                        lineno + 1
                    )));
                }
                for k in 1..poly.len() - 1 {
                    faces.push([poly[0], poly[k], poly[k + 1]]);
                }
            }
            _ => {}
        }
    }
    TriangleMesh::from_positions(&positions, faces, marked)
}

/// Loads `.obj` files as OBJ, anything else as mesh JSON.
pub fn load<T: Scalar>(path: &Path) -> Result<TriangleMesh<T>, MeshError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| MeshError::Io(format!("{}: {e}", path.display())))?;
    let is_obj = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.eq_ignore_ascii_case("obj"))
        .unwrap_or(false);
    if is_obj {
        parse_obj(&text, [])
    } else {
        parse_json(&text)
    }
}

pub fn to_json_string<T: Scalar>(mesh: &TriangleMesh<T>) -> String {
    serde_json::to_string_pretty(&MeshJson::from_mesh(mesh)).expect("mesh JSON serializes")
}
