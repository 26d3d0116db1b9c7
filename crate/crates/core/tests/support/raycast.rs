//! Per-pixel ray-casting reference renderer: one ray through every pixel
//! centre, nearest Möller–Trumbore hit over the scene's triangles (a
//! median-split BVH only prunes the search). Ties go to the triangle that
//! comes first in drawing order. Triangles with a vertex at or behind the
//! 0.01 m near plane are left out, matching the scene convention.

use super::{cross, dot, inverse_rotate, posed_vertices, rotate, sub, v, P3};
use synthseg::scene::SceneInstance;
use synthseg::Quat;

const Z_NEAR: f64 = 0.01;

#[derive(Clone, Copy)]
pub struct Tri {
    pub p: [P3; 3],
    pub owner: u32,
    pub order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub owner: u32,
    /// Camera-space depth of the hit.
    pub depth: f64,
    pub order: usize,
}

/// Scene triangles in drawing order with their owner ids.
pub fn scene_triangles(scene: &SceneInstance) -> Vec<Tri> {
    let mut out = Vec::new();
    let mut push = |pts: &[P3], faces: &[[u32; 3]], owner: u32| {
        for f in faces {
            let order = out.len();
            out.push(Tri { p: f.map(|i| pts[i as usize]), owner, order });
        }
    };
    for s in scene.environment.iter() {
        let pts: Vec<P3> = s.mesh.vertices.iter().map(|p| v(*p)).collect();
        push(&pts, &s.mesh.faces, 0);
    }
    for f in &scene.furniture {
        push(&posed_vertices(&f.mesh, f.pose.rotation, f.pose.translation), &f.mesh.faces, 0);
    }
    let mut objs: Vec<_> = scene.objects.iter().collect();
    objs.sort_by_key(|o| o.instance_id);
    for o in objs {
        push(&posed_vertices(&o.mesh, o.pose.rotation, o.pose.translation), &o.mesh.faces, o.instance_id);
    }
    out
}

/// Ray parameter of the hit, if any. Edges count as inside.
pub fn moller_trumbore(origin: P3, dir: P3, t: &Tri) -> Option<f64> {
    let e1 = sub(t.p[1], t.p[0]);
    let e2 = sub(t.p[2], t.p[0]);
    let pvec = cross(dir, e2);
    let det = dot(e1, pvec);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv = 1.0 / det;
    let tvec = sub(origin, t.p[0]);
    let u = dot(tvec, pvec) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let qvec = cross(tvec, e1);
    let w = dot(dir, qvec) * inv;
    if w < 0.0 || u + w > 1.0 {
        return None;
    }
    let dist = dot(e2, qvec) * inv;
    (dist > 0.0).then_some(dist)
}

struct Node {
    lo: P3,
    hi: P3,
    // leaf: tris[start..start+count]; inner: children at left, left+1
    start: usize,
    count: usize,
    left: usize,
}

pub struct Bvh {
    tris: Vec<Tri>,
    nodes: Vec<Node>,
}

fn tri_bounds(t: &Tri) -> (P3, P3) {
    let mut lo = t.p[0];
    let mut hi = t.p[0];
    for p in &t.p[1..] {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

impl Bvh {
    pub fn new(tris: Vec<Tri>) -> Bvh {
        let mut bvh = Bvh { tris, nodes: Vec::new() };
        if !bvh.tris.is_empty() {
            bvh.nodes.push(Node { lo: [0.0; 3], hi: [0.0; 3], start: 0, count: 0, left: 0 });
            let n = bvh.tris.len();
            bvh.build(0, 0, n);
        }
        bvh
    }

    fn build(&mut self, node: usize, start: usize, end: usize) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for t in &self.tris[start..end] {
            let (a, b) = tri_bounds(t);
            for k in 0..3 {
                lo[k] = lo[k].min(a[k]);
                hi[k] = hi[k].max(b[k]);
            }
        }
        self.nodes[node].lo = lo;
        self.nodes[node].hi = hi;
        if end - start <= 4 {
            self.nodes[node].start = start;
            self.nodes[node].count = end - start;
            return;
        }
        let axis = (0..3).max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b]))).unwrap();
        let centroid = |t: &Tri| t.p[0][axis] + t.p[1][axis] + t.p[2][axis];
        self.tris[start..end].sort_by(|a, b| centroid(a).total_cmp(&centroid(b)));
        let mid = (start + end) / 2;
        let left = self.nodes.len();
        for _ in 0..2 {
            self.nodes.push(Node { lo: [0.0; 3], hi: [0.0; 3], start: 0, count: 0, left: 0 });
        }
        self.nodes[node].left = left;
        self.build(left, start, mid);
        self.build(left + 1, mid, end);
    }

    fn slab(&self, node: &Node, origin: P3, inv_dir: P3, t_max: f64) -> bool {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for k in 0..3 {
            let mut a = (node.lo[k] - origin[k]) * inv_dir[k];
            let mut b = (node.hi[k] - origin[k]) * inv_dir[k];
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            // NaN from 0 * inf means the ray lies in the slab plane
            if a.is_nan() || b.is_nan() {
                continue;
            }
            t0 = t0.max(a);
            t1 = t1.min(b);
            if t0 > t1 * (1.0 + 1e-12) + 1e-12 {
                return false;
            }
        }
        true
    }

    /// Nearest hit, ties resolved toward lower drawing order.
    pub fn nearest(&self, origin: P3, dir: P3) -> Option<(f64, usize, u32)> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = [1.0 / dir[0], 1.0 / dir[1], 1.0 / dir[2]];
        let mut best: Option<(f64, usize, u32)> = None;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            let limit = best.map_or(f64::INFINITY, |b| b.0);
            if !self.slab(node, origin, inv, limit) {
                continue;
            }
            if node.count > 0 || node.left == 0 {
                for t in &self.tris[node.start..node.start + node.count] {
                    if let Some(d) = moller_trumbore(origin, dir, t) {
                        let better = match best {
                            None => true,
                            Some((bd, bo, _)) => d < bd || (d == bd && t.order < bo),
                        };
                        if better {
                            best = Some((d, t.order, t.owner));
                        }
                    }
                }
            } else {
                stack.push(node.left);
                stack.push(node.left + 1);
            }
        }
        best
    }
}

/// Ray-cast image of the scene: `None` where no triangle is hit.
pub fn raycast(scene: &SceneInstance) -> Vec<Option<Hit>> {
    let cam = &scene.camera;
    let q: Quat = cam.pose.rotation;
    let eye = v(cam.pose.translation);
    let tris: Vec<Tri> = scene_triangles(scene)
        .into_iter()
        .filter(|t| t.p.iter().all(|p| inverse_rotate(q, sub(*p, eye))[2] > Z_NEAR))
        .collect();
    let bvh = Bvh::new(tris);
    let k = cam.intrinsics;
    let mut out = Vec::with_capacity((cam.width * cam.height) as usize);
    for py in 0..cam.height {
        for px in 0..cam.width {
            // camera-frame direction with unit z, so ray distance = depth
            let dc = [(px as f64 + 0.5 - k.cx) / k.fx, (py as f64 + 0.5 - k.cy) / k.fy, 1.0];
            let dir = rotate(q, dc);
            out.push(bvh.nearest(eye, dir).map(|(depth, order, owner)| Hit { owner, depth, order }));
        }
    }
    out
}

/// Nearest hit depth of every object instance along the ray through a
/// pixel, brute force over each instance's triangles.
pub fn per_instance_depths(scene: &SceneInstance, px: u32, py: u32) -> Vec<(u32, f64)> {
    let cam = &scene.camera;
    let k = cam.intrinsics;
    let eye = v(cam.pose.translation);
    let dc = [(px as f64 + 0.5 - k.cx) / k.fx, (py as f64 + 0.5 - k.cy) / k.fy, 1.0];
    let dir = rotate(cam.pose.rotation, dc);
    let mut out = Vec::new();
    for o in &scene.objects {
        let pts = posed_vertices(&o.mesh, o.pose.rotation, o.pose.translation);
        let best = o
            .mesh
            .faces
            .iter()
            .filter_map(|f| moller_trumbore(eye, dir, &Tri { p: f.map(|i| pts[i as usize]), owner: 0, order: 0 }))
            .fold(f64::INFINITY, f64::min);
        if best.is_finite() {
            out.push((o.instance_id, best));
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct Agreement {
    pub pixels: usize,
    pub id_matches: usize,
    /// Object pixels whose 3x3 neighbourhood has one id in both images.
    pub interior: usize,
    pub max_interior_depth_error: f64,
}

impl Agreement {
    pub fn id_fraction(&self) -> f64 {
        self.id_matches as f64 / self.pixels as f64
    }
}

/// Compares a rendered id/depth buffer against the ray-cast image.
pub fn compare(width: u32, height: u32, ids: &[u32], depth: &[f64], oracle: &[Option<Hit>]) -> Agreement {
    let oid = |i: usize| oracle[i].map_or(0, |h| h.owner);
    let (w, h) = (width as i64, height as i64);
    let mut a = Agreement { pixels: ids.len(), id_matches: 0, interior: 0, max_interior_depth_error: 0.0 };
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            if ids[i] == oid(i) {
                a.id_matches += 1;
            }
            if ids[i] == 0 {
                continue;
            }
            let uniform = (-1..=1).all(|dy| {
                (-1..=1).all(|dx| {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w || ny >= h {
                        return false;
                    }
                    let j = (ny * w + nx) as usize;
                    ids[j] == ids[i] && oid(j) == ids[i]
                })
            });
            if uniform {
                a.interior += 1;
                let err = (depth[i] - oracle[i].unwrap().depth).abs();
                a.max_interior_depth_error = a.max_interior_depth_error.max(err);
            }
        }
    }
    a
}
