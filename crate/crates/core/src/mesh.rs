//! Triangle meshes: a Wavefront OBJ subset reader/writer, box and quad
//! primitives, and posed axis-aligned bounds.
//!
//! Only `v`, `vn` and `f` records are interpreted. Face corners may be
//! written as `i`, `i/j`, `i//k` or `i/j/k`; the vertex index drives the
//! geometry and the normal index, when every corner carries one, is used to
//! gather per-vertex normals. Polygons are fan-triangulated around their
//! first corner.

use crate::math::{Pose, Vec3};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("line {line}: malformed number `{token}`")]
    MalformedNumber { line: usize, token: String },
    #[error("line {line}: index {index} out of range (1..={count})")]
    IndexOutOfRange { line: usize, index: i64, count: usize },
    #[error("line {line}: face has {corners} vertices, need at least 3")]
    DegenerateFace { line: usize, corners: usize },
    #[error("mesh has no faces")]
    EmptyMesh,
    #[error("extent {0} is not positive")]
    NonPositiveExtent(f64),
    #[error("invalid mesh: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleMesh {
    pub name: String,
    pub vertices: Vec<Vec3>,
    pub normals: Option<Vec<Vec3>>,
    pub faces: Vec<[u32; 3]>,
}

impl TriangleMesh {
    /// Builds a mesh and checks the structural invariants.
    pub fn new(
        name: impl Into<String>,
        vertices: Vec<Vec3>,
        normals: Option<Vec<Vec3>>,
        faces: Vec<[u32; 3]>,
    ) -> Result<Self, MeshError> {
        let mesh = TriangleMesh { name: name.into(), vertices, normals, faces };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        if self.faces.is_empty() {
            return Err(MeshError::EmptyMesh);
        }
        let n = self.vertices.len();
        if let Some(v) = self.vertices.iter().find(|v| !v.is_finite()) {
            return Err(MeshError::Invalid(format!("non-finite vertex {v:?}")));
        }
        for f in &self.faces {
            if f.iter().any(|&i| i as usize >= n) {
                return Err(MeshError::Invalid(format!("face {f:?} exceeds {n} vertices")));
            }
        }
        if let Some(normals) = &self.normals {
            if normals.len() != n {
                return Err(MeshError::Invalid(format!("{} normals for {n} vertices", normals.len())));
            }
            if let Some(bad) = normals.iter().find(|v| (v.norm() - 1.0).abs() > 1e-4) {
                return Err(MeshError::Invalid(format!("normal {bad:?} is not unit length")));
            }
        }
        Ok(())
    }

    pub fn triangle(&self, face: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[face];
        [self.vertices[a as usize], self.vertices[b as usize], self.vertices[c as usize]]
    }

    /// Serializes to the same OBJ subset `parse_obj` reads.
    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "o {}", self.name);
        for v in &self.vertices {
            let _ = writeln!(out, "v {:?} {:?} {:?}", v.x, v.y, v.z);
        }
        if let Some(normals) = &self.normals {
            for n in normals {
                let _ = writeln!(out, "vn {:?} {:?} {:?}", n.x, n.y, n.z);
            }
            for [a, b, c] in &self.faces {
                let _ = writeln!(out, "f {0}//{0} {1}//{1} {2}//{2}", a + 1, b + 1, c + 1);
            }
        } else {
            for [a, b, c] in &self.faces {
                let _ = writeln!(out, "f {} {} {}", a + 1, b + 1, c + 1);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn from_points(points: impl IntoIterator<Item = Vec3>) -> Option<Aabb> {
        let mut it = points.into_iter();
        let first = it.next()?;
        Some(it.fold(Aabb { min: first, max: first }, |b, p| Aabb { min: b.min.min(p), max: b.max.max(p) }))
    }

    pub fn extents(&self) -> Vec3 {
        self.max - self.min
    }

    /// True when the interiors intersect; boxes that only touch do not
    /// overlap.
    pub fn overlaps(&self, o: &Aabb) -> bool {
        self.min.x < o.max.x
            && o.min.x < self.max.x
            && self.min.y < o.max.y
            && o.min.y < self.max.y
            && self.min.z < o.max.z
            && o.min.z < self.max.z
    }

    pub fn translated(&self, t: Vec3) -> Aabb {
        Aabb { min: self.min + t, max: self.max + t }
    }
}

/// Bounds of the mesh after applying `pose` to every vertex.
pub fn compute_aabb(mesh: &TriangleMesh, pose: &Pose) -> Aabb {
    let rot = pose.matrix();
    Aabb::from_points(mesh.vertices.iter().map(|&v| rot.mul_vec(v) + pose.translation)).expect("mesh has vertices")
}

fn parse_f64(token: &str, line: usize) -> Result<f64, MeshError> {
    // `str::parse::<f64>` is locale independent; reject the spellings it
    // accepts that are not plain decimal numbers.
    let lower = token.to_ascii_lowercase();
    let bad = lower.contains("inf") || lower.contains("nan");
    match token.parse::<f64>() {
        Ok(v) if !bad && v.is_finite() => Ok(v),
        _ => Err(MeshError::MalformedNumber { line, token: token.to_string() }),
    }
}

fn parse_vec3<'a>(mut fields: impl Iterator<Item = &'a str>, line: usize) -> Result<Vec3, MeshError> {
    let mut xyz = [0.0; 3];
    for slot in &mut xyz {
        let tok = fields.next().ok_or_else(|| MeshError::MalformedNumber { line, token: String::new() })?;
        *slot = parse_f64(tok, line)?;
    }
    Ok(Vec3::from(xyz))
}

/// Resolves a 1-based OBJ index. Negative (relative) indices are not
/// supported and are reported as malformed numbers.
fn parse_index(token: &str, count: usize, line: usize) -> Result<u32, MeshError> {
    let idx: i64 = token
        .parse()
        .ok()
        .filter(|_| !token.starts_with('-') && !token.starts_with('+'))
        .ok_or_else(|| MeshError::MalformedNumber { line, token: token.to_string() })?;
    if idx <= 0 || idx as usize > count {
        return Err(MeshError::IndexOutOfRange { line, index: idx, count });
    }
    Ok((idx - 1) as u32)
}

struct Corner {
    vertex: u32,
    normal: Option<u32>,
}

fn parse_corner(token: &str, n_vertices: usize, n_normals: usize, line: usize) -> Result<Corner, MeshError> {
    let mut parts = token.split('/');
    let vertex = parse_index(parts.next().unwrap_or(""), n_vertices, line)?;
    let _texcoord = parts.next();
    let normal = match parts.next() {
        Some(s) if !s.is_empty() => Some(parse_index(s, n_normals, line)?),
        _ => None,
    };
    Ok(Corner { vertex, normal })
}

/// Parses the OBJ subset described in the module docs.
pub fn parse_obj(text: &str) -> Result<TriangleMesh, MeshError> {
    let mut name = String::new();
    let mut vertices = Vec::new();
    let mut raw_normals = Vec::new();
    let mut faces = Vec::new();
    // Per-vertex normal gathered from face corners; `None` once any corner
    // omits a normal index.
    let mut corner_normals: Vec<Option<u32>> = Vec::new();
    let mut all_corners_have_normals = true;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("v") => {
                vertices.push(parse_vec3(fields, line_no)?);
                corner_normals.push(None);
            }
            Some("vn") => raw_normals.push(parse_vec3(fields, line_no)?),
            Some("f") => {
                let corners = fields
                    .map(|t| parse_corner(t, vertices.len(), raw_normals.len(), line_no))
                    .collect::<Result<Vec<_>, _>>()?;
                if corners.len() < 3 {
                    return Err(MeshError::DegenerateFace { line: line_no, corners: corners.len() });
                }
                for c in &corners {
                    match c.normal {
                        Some(n) => corner_normals[c.vertex as usize] = Some(n),
                        None => all_corners_have_normals = false,
                    }
                }
                for k in 1..corners.len() - 1 {
                    faces.push([corners[0].vertex, corners[k].vertex, corners[k + 1].vertex]);
                }
            }
            Some("o") if name.is_empty() => name = fields.collect::<Vec<_>>().join(" "),
            _ => {}
        }
    }

    if faces.is_empty() {
        return Err(MeshError::EmptyMesh);
    }

    let normals = if all_corners_have_normals && !raw_normals.is_empty() {
        // Vertices not referenced by any face get no normal from the file;
        // give up on per-vertex normals in that case.
        corner_normals.iter().map(|n| n.and_then(|k| raw_normals[k as usize].normalized())).collect::<Option<Vec<_>>>()
    } else {
        None
    };

    TriangleMesh::new(name, vertices, normals, faces)
}

fn check_extent(e: f64) -> Result<(), MeshError> {
    if e > 0.0 && e.is_finite() {
        Ok(())
    } else {
        Err(MeshError::NonPositiveExtent(e))
    }
}

/// Axis-aligned box centred at the origin with outward-facing triangles
/// (counter-clockwise seen from outside).
pub fn make_box(extents: Vec3) -> Result<TriangleMesh, MeshError> {
    for e in extents.to_array() {
        check_extent(e)?;
    }
    let h = extents * 0.5;
    let vertices = (0..8)
        .map(|i| {
            Vec3::new(
                if i & 1 == 0 { -h.x } else { h.x },
                if i & 2 == 0 { -h.y } else { h.y },
                if i & 4 == 0 { -h.z } else { h.z },
            )
        })
        .collect();
    let quads: [[u32; 4]; 6] = [
        [0, 2, 3, 1], // -z
        [4, 5, 7, 6], // +z
        [0, 1, 5, 4], // -y
        [2, 6, 7, 3], // +y
        [0, 4, 6, 2], // -x
        [1, 3, 7, 5], // +x
    ];
    let faces = quads.iter().flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]]).collect();
    TriangleMesh::new("box", vertices, None, faces)
}

/// Rectangle in the local xy-plane centred at the origin, facing +z.
pub fn make_quad(width: f64, height: f64) -> Result<TriangleMesh, MeshError> {
    check_extent(width)?;
    check_extent(height)?;
    let (w, h) = (0.5 * width, 0.5 * height);
    let vertices = vec![Vec3::new(-w, -h, 0.0), Vec3::new(w, -h, 0.0), Vec3::new(w, h, 0.0), Vec3::new(-w, h, 0.0)];
    let normals = Some(vec![Vec3::Z; 4]);
    TriangleMesh::new("quad", vertices, normals, vec![[0, 1, 2], [0, 2, 3]])
}
