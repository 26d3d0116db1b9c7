//! Software rasterizer producing color, instance-id and depth buffers.
//!
//! Triangles are drawn in a fixed order (room surfaces, furniture, then
//! objects by instance id and face index). A pixel is covered when its
//! centre lies inside or on the edges of the projected triangle, for
//! either winding. Depth is the perspective-correct camera-space z and the
//! depth test is strict, so on ties the earlier triangle keeps the pixel.
//! Triangles with any vertex at or behind the near plane are skipped, not
//! clipped.

mod camera;
pub mod netpbm;

pub use camera::{Camera, CameraError, Intrinsics, Projection, Z_NEAR};

use crate::math::{Pose, Vec3};
use crate::mesh::TriangleMesh;
use crate::scene::{BackgroundSpec, LightSpec, Rgb, SceneInstance};

/// Color of pixels no triangle reaches.
pub const SKY_COLOR: [u8; 3] = [180, 200, 230];

#[derive(Debug, Clone, PartialEq)]
pub struct FrameBuffers {
    pub width: u32,
    pub height: u32,
    /// Row-major RGB triples.
    pub rgb: Vec<u8>,
    /// Row-major instance ids; 0 is background.
    pub id: Vec<u32>,
    /// Row-major camera-space depth in meters; `+inf` where `id` is 0.
    pub depth: Vec<f64>,
}

impl FrameBuffers {
    pub fn new(width: u32, height: u32) -> Self {
        let n = width as usize * height as usize;
        FrameBuffers { width, height, rgb: SKY_COLOR.repeat(n), id: vec![0; n], depth: vec![f64::INFINITY; n] }
    }

    pub fn pixel_count(&self) -> usize {
        self.id.len()
    }

    pub fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }
}

#[derive(Clone, Copy)]
enum Material<'a> {
    Flat(Rgb),
    Pattern(&'a BackgroundSpec),
}

struct Target<'a> {
    camera: &'a Camera,
    light: &'a LightSpec,
    fb: FrameBuffers,
    zbuf: Vec<f64>,
    world: Vec<Vec3>,
    projected: Vec<Option<(f64, f64, f64)>>,
}

fn quantize(c: f64) -> u8 {
    // f64::round rounds half away from zero
    (c.clamp(0.0, 1.0) * 255.0).round() as u8
}

impl Target<'_> {
    fn draw(&mut self, mesh: &TriangleMesh, pose: Option<&Pose>, owner: u32, material: Material<'_>) {
        let w2c = self.camera.world_to_camera();
        let eye = self.camera.position();
        self.world.clear();
        self.projected.clear();
        match pose {
            Some(p) => {
                let rot = p.matrix();
                self.world.extend(mesh.vertices.iter().map(|&v| rot.mul_vec(v) + p.translation));
            }
            None => self.world.extend_from_slice(&mesh.vertices),
        }
        for &w in &self.world {
            let pc = w2c.mul_vec(w - eye);
            self.projected.push(match self.camera.project_camera_point(pc) {
                Projection::Visible { u, v, z_cam } => Some((u, v, z_cam)),
                Projection::Behind => None,
            });
        }

        let (width, height) = (self.fb.width as i64, self.fb.height as i64);
        let to_light = -self.light.direction;
        for face in &mesh.faces {
            let [i0, i1, i2] = face.map(|i| i as usize);
            let (Some(p0), Some(p1), Some(p2)) = (self.projected[i0], self.projected[i1], self.projected[i2]) else {
                continue;
            };
            let area = (p1.0 - p0.0) * (p2.1 - p0.1) - (p1.1 - p0.1) * (p2.0 - p0.0);
            if area == 0.0 || !area.is_finite() {
                continue;
            }
            let sign = area.signum();
            let inv_area = 1.0 / area;

            let min_u = p0.0.min(p1.0).min(p2.0);
            let max_u = p0.0.max(p1.0).max(p2.0);
            let min_v = p0.1.min(p1.1).min(p2.1);
            let max_v = p0.1.max(p1.1).max(p2.1);
            let x_lo = ((min_u - 0.5).ceil() as i64).max(0);
            let x_hi = ((max_u - 0.5).floor() as i64).min(width - 1);
            let y_lo = ((min_v - 0.5).ceil() as i64).max(0);
            let y_hi = ((max_v - 0.5).floor() as i64).min(height - 1);
            if x_lo > x_hi || y_lo > y_hi {
                continue;
            }

            let (w0, w1, w2) = (self.world[i0], self.world[i1], self.world[i2]);
            let mut normal = (w1 - w0).cross(w2 - w0).normalized().unwrap_or(-self.camera.forward());
            if normal.dot(eye - w0) < 0.0 {
                normal = -normal;
            }
            let shade = self.light.ambient + self.light.intensity * normal.dot(to_light).max(0.0);
            let (iz0, iz1, iz2) = (1.0 / p0.2, 1.0 / p1.2, 1.0 / p2.2);

            for py in y_lo..=y_hi {
                let y = py as f64 + 0.5;
                for px in x_lo..=x_hi {
                    let x = px as f64 + 0.5;
                    let e12 = (p2.0 - p1.0) * (y - p1.1) - (p2.1 - p1.1) * (x - p1.0);
                    let e20 = (p0.0 - p2.0) * (y - p2.1) - (p0.1 - p2.1) * (x - p2.0);
                    let e01 = (p1.0 - p0.0) * (y - p0.1) - (p1.1 - p0.1) * (x - p0.0);
                    if sign * e12 < 0.0 || sign * e20 < 0.0 || sign * e01 < 0.0 {
                        continue;
                    }
                    let (b0, b1, b2) = (e12 * inv_area, e20 * inv_area, e01 * inv_area);
                    let inv_z = b0 * iz0 + b1 * iz1 + b2 * iz2;
                    let depth = 1.0 / inv_z;
                    let idx = py as usize * width as usize + px as usize;
                    // strict test: equal depth keeps the earlier triangle, NaN never wins
                    if depth.partial_cmp(&self.zbuf[idx]) != Some(std::cmp::Ordering::Less) {
                        continue;
                    }
                    self.zbuf[idx] = depth;
                    self.fb.id[idx] = owner;
                    let base = match material {
                        Material::Flat(c) => c,
                        Material::Pattern(bg) => {
                            let (c0, c1, c2) = (b0 * iz0 * depth, b1 * iz1 * depth, b2 * iz2 * depth);
                            let p = w0 * c0 + w1 * c1 + w2 * c2;
                            bg.color_at(p.x, p.y)
                        }
                    };
                    let out = &mut self.fb.rgb[3 * idx..3 * idx + 3];
                    for c in 0..3 {
                        out[c] = quantize(base[c] * shade);
                    }
                }
            }
        }
    }
}

/// Renders one shot of a sampled scene.
pub fn rasterize(scene: &SceneInstance) -> FrameBuffers {
    let cam = &scene.camera;
    let fb = FrameBuffers::new(cam.width, cam.height);
    let n = fb.pixel_count();
    let mut target = Target {
        camera: cam,
        light: &scene.light,
        fb,
        zbuf: vec![f64::INFINITY; n],
        world: Vec::new(),
        projected: Vec::new(),
    };

    for surf in scene.environment.iter() {
        let bg = scene.backgrounds.get(surf.kind);
        target.draw(&surf.mesh, None, 0, Material::Pattern(bg));
    }
    for f in &scene.furniture {
        target.draw(&f.mesh, Some(&f.pose), 0, Material::Flat(f.albedo));
    }
    let mut objects: Vec<_> = scene.objects.iter().collect();
    objects.sort_by_key(|o| o.instance_id);
    for o in objects {
        target.draw(&o.mesh, Some(&o.pose), o.instance_id, Material::Flat(o.albedo));
    }

    let Target { mut fb, zbuf, .. } = target;
    for (i, &id) in fb.id.iter().enumerate() {
        if id != 0 {
            fb.depth[i] = zbuf[i];
        }
    }
    fb
}
