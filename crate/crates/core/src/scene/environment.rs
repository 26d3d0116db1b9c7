use super::Room;
use crate::math::Vec3;
use crate::mesh::TriangleMesh;
use serde::Serialize;

/// Room surfaces are tessellated into tiles no larger than this (meters).
/// The rasterizer drops triangles with a vertex behind the near plane, so
/// small tiles keep the dropped area near the camera and out of view.
pub const ENV_TILE_SIZE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    Floor,
    Wall,
    Ceiling,
}

/// One room surface, in world coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvSurface {
    pub kind: SurfaceKind,
    pub mesh: TriangleMesh,
}

/// Grid over the parallelogram `origin + s*u + t*v`, `s, t` in `[0, 1]`.
fn grid(name: &str, origin: Vec3, u: Vec3, v: Vec3) -> TriangleMesh {
    let nu = ((u.norm() / ENV_TILE_SIZE).ceil() as u32).max(1);
    let nv = ((v.norm() / ENV_TILE_SIZE).ceil() as u32).max(1);
    let mut vertices = Vec::with_capacity(((nu + 1) * (nv + 1)) as usize);
    for j in 0..=nv {
        for i in 0..=nu {
            let s = i as f64 / nu as f64;
            let t = j as f64 / nv as f64;
            vertices.push(origin + u * s + v * t);
        }
    }
    let mut faces = Vec::with_capacity((2 * nu * nv) as usize);
    let idx = |i: u32, j: u32| j * (nu + 1) + i;
    for j in 0..nv {
        for i in 0..nu {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    TriangleMesh { name: name.to_string(), vertices, normals: None, faces }
}

/// Floor, four walls and ceiling of the room, in that order.
pub fn environment_surfaces(room: &Room) -> Vec<EnvSurface> {
    let (hw, hd, h) = (0.5 * room.width, 0.5 * room.depth, room.height);
    let x = Vec3::new(room.width, 0.0, 0.0);
    let y = Vec3::new(0.0, room.depth, 0.0);
    let z = Vec3::new(0.0, 0.0, h);
    let surf = |kind, mesh| EnvSurface { kind, mesh };
    vec![
        surf(SurfaceKind::Floor, grid("floor", Vec3::new(-hw, -hd, 0.0), x, y)),
        surf(SurfaceKind::Wall, grid("wall_south", Vec3::new(-hw, -hd, 0.0), x, z)),
        surf(SurfaceKind::Wall, grid("wall_north", Vec3::new(-hw, hd, 0.0), x, z)),
        surf(SurfaceKind::Wall, grid("wall_west", Vec3::new(-hw, -hd, 0.0), y, z)),
        surf(SurfaceKind::Wall, grid("wall_east", Vec3::new(hw, -hd, 0.0), y, z)),
        surf(SurfaceKind::Ceiling, grid("ceiling", Vec3::new(-hw, -hd, h), x, y)),
    ]
}
