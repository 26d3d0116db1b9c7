//! Reference implementations shared by the integration tests. Nothing in
//! here calls into the library's geometry, projection or rasterization
//! code; scenes are only read as data.

#![allow(dead_code)]

pub mod raycast;

use sha2::{Digest, Sha256};
use std::path::Path;
use synthseg::scene::{PlacementRegion, SceneInstance};
use synthseg::{Quat, TriangleMesh, Vec3};

pub type P3 = [f64; 3];

pub fn v(p: Vec3) -> P3 {
    [p.x, p.y, p.z]
}

pub fn sub(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: P3, b: P3) -> P3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: P3, s: f64) -> P3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot(a: P3, b: P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: P3, b: P3) -> P3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn hamilton(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    let [aw, ax, ay, az] = a;
    let [bw, bx, by, bz] = b;
    [
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ]
}

/// Rotates `p` by the quaternion through the sandwich product q p q*.
pub fn rotate(q: Quat, p: P3) -> P3 {
    let n = (q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z).sqrt();
    let q = [q.w / n, q.x / n, q.y / n, q.z / n];
    let conj = [q[0], -q[1], -q[2], -q[3]];
    let r = hamilton(hamilton(q, [0.0, p[0], p[1], p[2]]), conj);
    [r[1], r[2], r[3]]
}

pub fn inverse_rotate(q: Quat, p: P3) -> P3 {
    rotate(Quat { w: q.w, x: -q.x, y: -q.y, z: -q.z }, p)
}

/// Explicit rotation matrix via the sandwich product applied to the basis.
pub fn rotation_matrix(q: Quat) -> [[f64; 3]; 3] {
    let cols = [rotate(q, [1.0, 0.0, 0.0]), rotate(q, [0.0, 1.0, 0.0]), rotate(q, [0.0, 0.0, 1.0])];
    let mut m = [[0.0; 3]; 3];
    for (j, c) in cols.iter().enumerate() {
        for i in 0..3 {
            m[i][j] = c[i];
        }
    }
    m
}

pub fn posed_vertices(mesh: &TriangleMesh, rotation: Quat, translation: Vec3) -> Vec<P3> {
    let m = rotation_matrix(rotation);
    mesh.vertices
        .iter()
        .map(|p| {
            let p = v(*p);
            let r = [dot(m[0], p), dot(m[1], p), dot(m[2], p)];
            add(r, v(translation))
        })
        .collect()
}

pub fn bounds(points: &[P3]) -> (P3, P3) {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

/// Pinhole projection through a 4x4 homogeneous matrix K [R^T | -R^T t].
pub fn project_homogeneous(
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    cam_rotation: Quat,
    cam_position: Vec3,
    point: P3,
) -> Option<(f64, f64, f64)> {
    let r = rotation_matrix(cam_rotation);
    let t = v(cam_position);
    // world -> camera extrinsics, rows of R^T are columns of R
    let mut ext = [[0.0; 4]; 4];
    for i in 0..3 {
        for j in 0..3 {
            ext[i][j] = r[j][i];
        }
        ext[i][3] = -(r[0][i] * t[0] + r[1][i] * t[1] + r[2][i] * t[2]);
    }
    ext[3][3] = 1.0;
    let k = [[fx, 0.0, cx, 0.0], [0.0, fy, cy, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
    let mut p = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            p[i][j] = (0..4).map(|m| k[i][m] * ext[m][j]).sum();
        }
    }
    let x = [point[0], point[1], point[2], 1.0];
    let h: Vec<f64> = (0..4).map(|i| (0..4).map(|j| p[i][j] * x[j]).sum()).collect();
    if h[2] <= 0.01 {
        return None;
    }
    Some((h[0] / h[2], h[1] / h[2], h[2]))
}

/// Reference splitmix64 finalizer using 128-bit arithmetic reduced mod 2^64.
pub fn reference_seed(global_seed: u64, index: u64) -> u64 {
    const M: u128 = 1 << 64;
    let mut z = (global_seed as u128 + (index as u128 * 0x9E3779B97F4A7C15u128) % M) % M;
    z ^= z >> 30;
    z = (z * 0xBF58476D1CE4E5B9u128) % M;
    z ^= z >> 27;
    z = (z * 0x94D049BB133111EBu128) % M;
    z ^= z >> 31;
    z as u64
}

/// Brute-force placement check. Returns a list of human-readable
/// violations (empty when the scene is consistent).
pub fn placement_violations(scene: &SceneInstance, region: &PlacementRegion) -> Vec<String> {
    const TOL: f64 = 1e-9;
    let boxes: Vec<(u32, P3, P3)> = scene
        .objects
        .iter()
        .map(|o| {
            let (lo, hi) = bounds(&posed_vertices(&o.mesh, o.pose.rotation, o.pose.translation));
            (o.instance_id, lo, hi)
        })
        .collect();
    let [x0, y0, x1, y1] = region.rect;
    let mut out = Vec::new();
    for (id, lo, hi) in &boxes {
        if lo[0] < x0 - TOL || lo[1] < y0 - TOL || hi[0] > x1 + TOL || hi[1] > y1 + TOL {
            out.push(format!("instance {id} footprint {lo:?}..{hi:?} leaves region {:?}", region.rect));
        }
        if (lo[2] - region.support_z).abs() > TOL {
            out.push(format!("instance {id} rests at z={} not {}", lo[2], region.support_z));
        }
    }
    for i in 0..boxes.len() {
        for j in i + 1..boxes.len() {
            let (a, alo, ahi) = &boxes[i];
            let (b, blo, bhi) = &boxes[j];
            let overlap = (0..3).all(|k| alo[k] < bhi[k] - TOL && blo[k] < ahi[k] - TOL);
            if overlap {
                out.push(format!("instances {a} and {b} overlap"));
            }
        }
    }
    out
}

/// SHA-256 over (relative name, contents) of every file in `dir` whose name
/// passes `keep`, in sorted order.
pub fn dir_digest(dir: &Path, keep: impl Fn(&str) -> bool) -> String {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| keep(n))
        .collect();
    names.sort();
    let mut h = Sha256::new();
    for n in &names {
        h.update(n.as_bytes());
        h.update([0]);
        h.update(std::fs::read(dir.join(n)).unwrap());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sample_spec_path() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/tabletop.json")
}

pub fn obj_corpus_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/obj")
}

pub enum Expected {
    Valid { vertices: usize, triangles: usize },
    Error(synthseg::mesh::MeshError),
}

/// Expected outcome for every file in the OBJ corpus.
pub fn obj_corpus() -> Vec<(&'static str, Expected)> {
    use synthseg::mesh::MeshError::*;
    use Expected::*;
    let malformed = |line, token: &str| Error(MalformedNumber { line, token: token.into() });
    vec![
        ("valid_minimal.obj", Valid { vertices: 3, triangles: 1 }),
        ("valid_cube_quads.obj", Valid { vertices: 8, triangles: 12 }),
        ("valid_mixed_index_forms.obj", Valid { vertices: 5, triangles: 6 }),
        ("valid_pentagon_comments.obj", Valid { vertices: 5, triangles: 3 }),
        ("valid_crlf_quad.obj", Valid { vertices: 4, triangles: 2 }),
        ("err_malformed_number.obj", malformed(3, "1.x")),
        ("err_nan_coordinate.obj", malformed(2, "nan")),
        ("err_negative_index.obj", malformed(4, "-3")),
        ("err_index_out_of_range.obj", Error(IndexOutOfRange { line: 4, index: 4, count: 3 })),
        ("err_zero_index.obj", Error(IndexOutOfRange { line: 4, index: 0, count: 3 })),
        ("err_normal_out_of_range.obj", Error(IndexOutOfRange { line: 5, index: 2, count: 1 })),
        ("err_degenerate_face.obj", Error(DegenerateFace { line: 4, corners: 2 })),
        ("err_empty.obj", Error(EmptyMesh)),
    ]
}

/// Triangle count implied by the face records: sum of (corners - 2).
pub fn fan_count(obj_text: &str) -> usize {
    obj_text
        .lines()
        .map(|l| l.split('#').next().unwrap())
        .filter_map(|l| {
            let mut it = l.split_whitespace();
            (it.next() == Some("f")).then(|| it.count())
        })
        .map(|n| n - 2)
        .sum()
}

/// Column-major RLE decode into a row-major bitmap; `None` if the counts do
/// not cover the image exactly.
pub fn rle_to_bitmap(counts: &[u32], width: u32, height: u32) -> Option<Vec<bool>> {
    let total = width as u64 * height as u64;
    if counts.iter().map(|&c| c as u64).sum::<u64>() != total {
        return None;
    }
    let mut column_major = Vec::with_capacity(total as usize);
    for (i, &c) in counts.iter().enumerate() {
        column_major.extend(std::iter::repeat_n(i % 2 == 1, c as usize));
    }
    let mut out = vec![false; total as usize];
    for (k, bit) in column_major.into_iter().enumerate() {
        let (col, row) = (k / height as usize, k % height as usize);
        out[row * width as usize + col] = bit;
    }
    Some(out)
}

/// Shrinking the box by one pixel on any side must lose a mask pixel, and
/// nothing may lie outside it.
pub fn bbox_is_tight(bits: &[bool], width: u32, bbox: [u32; 4]) -> bool {
    let [x, y, w, h] = bbox;
    if w == 0 || h == 0 {
        return false;
    }
    let on = |c: u32, r: u32| bits[(r * width + c) as usize];
    let height = bits.len() as u32 / width;
    let outside = (0..height).any(|r| (0..width).any(|c| on(c, r) && (c < x || c >= x + w || r < y || r >= y + h)));
    let left = (y..y + h).any(|r| on(x, r));
    let right = (y..y + h).any(|r| on(x + w - 1, r));
    let top = (x..x + w).any(|c| on(c, y));
    let bottom = (x..x + w).any(|c| on(c, y + h - 1));
    !outside && left && right && top && bottom
}

/// Reads a binary 16-bit PGM.
pub fn read_pgm16(bytes: &[u8]) -> (u32, u32, Vec<u32>) {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).unwrap().to_string());
    }
    pos += 1;
    assert_eq!(fields[0], "P5");
    assert_eq!(fields[3], "65535");
    let (w, h): (u32, u32) = (fields[1].parse().unwrap(), fields[2].parse().unwrap());
    let data = &bytes[pos..];
    assert_eq!(data.len(), (w * h * 2) as usize);
    let ids = data.chunks(2).map(|b| u16::from_be_bytes([b[0], b[1]]) as u32).collect();
    (w, h, ids)
}

/// Checks every annotation of a written dataset against itself and the id
/// maps next to it. Returns the problems found and the number of
/// annotations checked.
pub fn check_dataset(dir: &Path) -> (Vec<String>, usize) {
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.join("annotations.json")).unwrap()).unwrap();
    let mut problems = Vec::new();
    let images = manifest["images"].as_array().unwrap();
    let anns = manifest["annotations"].as_array().unwrap();
    let mut ids_by_image = std::collections::HashMap::new();
    for img in images {
        let id = img["id"].as_u64().unwrap();
        let name = img["file_name"].as_str().unwrap().replace("img_", "ids_").replace(".ppm", ".pgm");
        ids_by_image.insert(id, read_pgm16(&std::fs::read(dir.join(name)).unwrap()));
    }
    for (k, a) in anns.iter().enumerate() {
        let tag = format!("annotation {}", a["id"]);
        if a["id"].as_u64() != Some(k as u64 + 1) {
            problems.push(format!("{tag}: ids are not consecutive from 1"));
        }
        let (w, h, ids) = &ids_by_image[&a["image_id"].as_u64().unwrap()];
        let size: Vec<u64> =
            a["segmentation"]["size"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
        if size != [*h as u64, *w as u64] {
            problems.push(format!("{tag}: size {size:?}"));
        }
        let counts: Vec<u32> =
            a["segmentation"]["counts"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap() as u32).collect();
        let Some(bits) = rle_to_bitmap(&counts, *w, *h) else {
            problems.push(format!("{tag}: counts do not sum to {}", w * h));
            continue;
        };
        let area = bits.iter().filter(|b| **b).count() as u64;
        if a["area"].as_u64() != Some(area) {
            problems.push(format!("{tag}: area {} but mask has {area}", a["area"]));
        }
        let bbox: Vec<u32> = a["bbox"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap() as u32).collect();
        if !bbox_is_tight(&bits, *w, [bbox[0], bbox[1], bbox[2], bbox[3]]) {
            problems.push(format!("{tag}: bbox {bbox:?} not tight"));
        }
        // mask must be exactly one instance's pixels in the id map
        let owner = bits.iter().position(|b| *b).map(|i| ids[i]);
        if let Some(owner) = owner {
            let same = ids.iter().zip(&bits).all(|(id, b)| (*id == owner) == *b);
            if owner == 0 || !same {
                problems.push(format!("{tag}: mask differs from id map instance {owner}"));
            }
        }
        if a["iscrowd"].as_u64() != Some(0) {
            problems.push(format!("{tag}: iscrowd"));
        }
    }
    (problems, anns.len())
}
