//! Scene templates and the domain-randomized samplers that turn a template
//! into one concrete shot: furniture layout, object placement, lighting,
//! background textures and camera.

mod environment;
pub mod spec_file;

pub use environment::{environment_surfaces, EnvSurface, SurfaceKind, ENV_TILE_SIZE};
pub use spec_file::{load_scene_spec, parse_scene_spec, SpecError};

pub use crate::math::Pose;
use crate::math::{Quat, Vec3};
use crate::mesh::{compute_aabb, Aabb, TriangleMesh};
use crate::render::{Camera, CameraError, Intrinsics};
use rand::Rng;
use serde::Serialize;
use std::f64::consts::TAU;
use std::sync::Arc;
use thiserror::Error;

/// Rejection-sampling attempts per object before giving up.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 100;
/// Furniture yaw is jittered uniformly within this many degrees of nominal.
pub const FURNITURE_YAW_JITTER_DEG: f64 = 15.0;
pub const LIGHT_INTENSITY_RANGE: (f64, f64) = (0.5, 1.5);
pub const LIGHT_AMBIENT_RANGE: (f64, f64) = (0.1, 0.4);
/// Per-instance albedo is the class albedo scaled by a factor in this range.
pub const ALBEDO_SCALE_RANGE: (f64, f64) = (0.8, 1.2);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("could only place {placed} of {requested} objects in region `{region}`")]
    TooCrowded { region: String, placed: usize, requested: usize },
    #[error("object library is empty")]
    EmptyLibrary,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Camera(#[from] CameraError),
}

pub type Rgb = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Room {
    pub width: f64,
    pub depth: f64,
    pub height: f64,
}

impl Room {
    /// The room spans `[-width/2, width/2] x [-depth/2, depth/2] x [0, height]`.
    pub fn contains_xy(&self, x: f64, y: f64) -> bool {
        x.abs() <= 0.5 * self.width && y.abs() <= 0.5 * self.depth
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacementRegion {
    pub name: String,
    /// `[x_min, y_min, x_max, y_max]` in meters.
    pub rect: [f64; 4],
    pub support_z: f64,
}

impl PlacementRegion {
    pub fn center(&self) -> Vec3 {
        let [x0, y0, x1, y1] = self.rect;
        Vec3::new(0.5 * (x0 + x1), 0.5 * (y0 + y1), self.support_z)
    }

    pub fn contains_footprint(&self, b: &Aabb) -> bool {
        let [x0, y0, x1, y1] = self.rect;
        b.min.x >= x0 && b.max.x <= x1 && b.min.y >= y0 && b.max.y <= y1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectClass {
    pub class_id: u32,
    pub class_name: String,
    #[serde(skip)]
    pub mesh: Arc<TriangleMesh>,
    pub base_albedo: Rgb,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectInstance {
    pub instance_id: u32,
    pub class_id: u32,
    pub pose: Pose,
    pub albedo: Rgb,
    #[serde(skip)]
    pub mesh: Arc<TriangleMesh>,
}

impl ObjectInstance {
    pub fn aabb(&self) -> Aabb {
        compute_aabb(&self.mesh, &self.pose)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LightSpec {
    /// Unit vector pointing from the light toward the scene.
    pub direction: Vec3,
    pub intensity: f64,
    pub ambient: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pattern {
    Solid,
    Checker,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BackgroundSpec {
    pub pattern: Pattern,
    pub color_a: Rgb,
    pub color_b: Rgb,
    pub checker_period: f64,
}

impl BackgroundSpec {
    /// Pattern color at world `(x, y)`.
    pub fn color_at(&self, x: f64, y: f64) -> Rgb {
        match self.pattern {
            Pattern::Solid => self.color_a,
            Pattern::Checker => {
                let cx = (x / self.checker_period).floor() as i64;
                let cy = (y / self.checker_period).floor() as i64;
                if (cx + cy).rem_euclid(2) == 0 {
                    self.color_a
                } else {
                    self.color_b
                }
            }
        }
    }
}

/// Sampling ranges for one background surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BackgroundRange {
    pub color_min: Rgb,
    pub color_max: Rgb,
    pub checker_period_range: [f64; 2],
}

impl Default for BackgroundRange {
    fn default() -> Self {
        BackgroundRange { color_min: [0.1; 3], color_max: [0.9; 3], checker_period_range: [0.1, 0.6] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Surfaces<T> {
    pub floor: T,
    pub wall: T,
    pub ceiling: T,
}

impl<T> Surfaces<T> {
    pub fn get(&self, kind: SurfaceKind) -> &T {
        match kind {
            SurfaceKind::Floor => &self.floor,
            SurfaceKind::Wall => &self.wall,
            SurfaceKind::Ceiling => &self.ceiling,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Furniture {
    pub name: String,
    #[serde(skip)]
    pub mesh: Arc<TriangleMesh>,
    pub nominal: Pose,
    pub jitter_radius: f64,
    pub albedo: Rgb,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacedFurniture {
    pub name: String,
    pub pose: Pose,
    pub albedo: Rgb,
    #[serde(skip)]
    pub mesh: Arc<TriangleMesh>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CameraSampling {
    pub radius_range: [f64; 2],
    pub elevation_range_deg: [f64; 2],
    pub intrinsics: Intrinsics,
    pub width: u32,
    pub height: u32,
}

impl CameraSampling {
    pub fn validate(&self) -> Result<(), SceneError> {
        let [r_lo, r_hi] = self.radius_range;
        let [e_lo, e_hi] = self.elevation_range_deg;
        if !(r_lo > 0.0 && r_lo <= r_hi && r_hi.is_finite()) {
            return Err(SceneError::InvalidParameter(format!(
                "camera radius range [{r_lo}, {r_hi}] must satisfy 0 < lo <= hi"
            )));
        }
        if !(0.0 <= e_lo && e_lo <= e_hi && e_hi <= 85.0) {
            return Err(SceneError::InvalidParameter(format!(
                "camera elevation range [{e_lo}, {e_hi}] must lie in [0, 85] degrees"
            )));
        }
        Camera::new(self.intrinsics, self.width, self.height, Pose::IDENTITY)?;
        Ok(())
    }

    /// Rescales the image size and intrinsics together.
    pub fn with_image_size(&self, width: u32, height: u32) -> CameraSampling {
        let probe =
            Camera { intrinsics: self.intrinsics, width: self.width, height: self.height, pose: Pose::IDENTITY };
        let resized = probe.resized(width, height);
        CameraSampling { intrinsics: resized.intrinsics, width, height, ..*self }
    }
}

/// Scene template: everything a shot may be sampled from.
#[derive(Debug, Clone, Serialize)]
pub struct SceneSpec {
    pub room: Room,
    pub backgrounds: Surfaces<BackgroundRange>,
    pub furniture: Vec<Furniture>,
    pub library: Vec<ObjectClass>,
    pub regions: Vec<PlacementRegion>,
    pub objects_per_scene: [u32; 2],
    pub camera: CameraSampling,
    #[serde(skip)]
    pub environment: Arc<[EnvSurface]>,
}

impl SceneSpec {
    /// Assembles a template and tessellates the room surfaces. Call
    /// [`SceneSpec::validate`] before sampling from user-provided data.
    pub fn new(
        room: Room,
        backgrounds: Surfaces<BackgroundRange>,
        furniture: Vec<Furniture>,
        library: Vec<ObjectClass>,
        regions: Vec<PlacementRegion>,
        objects_per_scene: [u32; 2],
        camera: CameraSampling,
    ) -> Self {
        let environment = environment_surfaces(&room).into();
        SceneSpec { room, backgrounds, furniture, library, regions, objects_per_scene, camera, environment }
    }

    pub fn with_image_size(mut self, width: u32, height: u32) -> Self {
        self.camera = self.camera.with_image_size(width, height);
        self
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        spec_file::validate(self)
    }
}

/// One fully sampled shot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SceneInstance {
    pub furniture: Vec<PlacedFurniture>,
    pub region: String,
    pub objects: Vec<ObjectInstance>,
    pub light: LightSpec,
    pub backgrounds: Surfaces<BackgroundSpec>,
    pub camera: Camera,
    #[serde(skip)]
    pub environment: Arc<[EnvSurface]>,
}

impl SceneInstance {
    pub fn triangle_count(&self) -> usize {
        self.environment.iter().map(|s| s.mesh.faces.len()).sum::<usize>()
            + self.furniture.iter().map(|f| f.mesh.faces.len()).sum::<usize>()
            + self.objects.iter().map(|o| o.mesh.faces.len()).sum::<usize>()
    }

    /// Stable textual form, used to compare sampled scenes.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scene instances serialize")
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        // still consume a draw so the stream layout is range independent
        let _: f64 = rng.gen();
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Places `count` objects upright on the region's support plane by
/// rejection sampling against the region bounds and the already placed
/// objects' boxes.
pub fn place_objects<R: Rng + ?Sized>(
    library: &[ObjectClass],
    region: &PlacementRegion,
    count: usize,
    rng: &mut R,
) -> Result<Vec<ObjectInstance>, SceneError> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if library.is_empty() {
        return Err(SceneError::EmptyLibrary);
    }
    let [x0, y0, x1, y1] = region.rect;
    let mut placed: Vec<ObjectInstance> = Vec::with_capacity(count);
    let mut boxes: Vec<Aabb> = Vec::with_capacity(count);

    for n in 0..count {
        let class = &library[rng.gen_range(0..library.len())];
        let mut accepted = None;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let yaw = rng.gen_range(0.0..TAU);
            let local = compute_aabb(&class.mesh, &Pose::from_yaw(Vec3::ZERO, yaw));
            let (xl, xh) = (x0 - local.min.x, x1 - local.max.x);
            let (yl, yh) = (y0 - local.min.y, y1 - local.max.y);
            if xl > xh || yl > yh {
                continue;
            }
            let t = Vec3::new(uniform(rng, xl, xh), uniform(rng, yl, yh), region.support_z - local.min.z);
            let pose = Pose::from_yaw(t, yaw);
            let bb = compute_aabb(&class.mesh, &pose);
            if !region.contains_footprint(&bb) || boxes.iter().any(|b| b.overlaps(&bb)) {
                continue;
            }
            accepted = Some((pose, bb));
            break;
        }
        let Some((pose, bb)) = accepted else {
            return Err(SceneError::TooCrowded { region: region.name.clone(), placed: n, requested: count });
        };
        let (s_lo, s_hi) = ALBEDO_SCALE_RANGE;
        let scale = rng.gen_range(s_lo..=s_hi);
        let albedo = class.base_albedo.map(|c| (c * scale).clamp(0.0, 1.0));
        boxes.push(bb);
        placed.push(ObjectInstance {
            instance_id: n as u32 + 1,
            class_id: class.class_id,
            pose,
            albedo,
            mesh: Arc::clone(&class.mesh),
        });
    }
    Ok(placed)
}

/// Light from a direction uniform over the upper hemisphere.
pub fn sample_light<R: Rng + ?Sized>(rng: &mut R) -> LightSpec {
    // cos(polar) uniform in [0, 1] is uniform in solid angle
    let down = rng.gen_range(0.0..=1.0f64);
    let azimuth = rng.gen_range(0.0..TAU);
    let s = (1.0 - down * down).max(0.0).sqrt();
    let direction = Vec3::new(s * azimuth.cos(), s * azimuth.sin(), -down).normalized().unwrap_or(-Vec3::Z);
    let (i_lo, i_hi) = LIGHT_INTENSITY_RANGE;
    let (a_lo, a_hi) = LIGHT_AMBIENT_RANGE;
    LightSpec { direction, intensity: rng.gen_range(i_lo..=i_hi), ambient: rng.gen_range(a_lo..=a_hi) }
}

pub fn sample_background<R: Rng + ?Sized>(range: &BackgroundRange, rng: &mut R) -> BackgroundSpec {
    let pattern = if rng.gen_bool(0.5) { Pattern::Checker } else { Pattern::Solid };
    let mut color = || -> Rgb { std::array::from_fn(|c| uniform(rng, range.color_min[c], range.color_max[c])) };
    let color_a = color();
    let color_b = color();
    let [p_lo, p_hi] = range.checker_period_range;
    BackgroundSpec { pattern, color_a, color_b, checker_period: uniform(rng, p_lo, p_hi) }
}

pub fn sample_backgrounds<R: Rng + ?Sized>(
    ranges: &Surfaces<BackgroundRange>,
    rng: &mut R,
) -> Surfaces<BackgroundSpec> {
    Surfaces {
        floor: sample_background(&ranges.floor, rng),
        wall: sample_background(&ranges.wall, rng),
        ceiling: sample_background(&ranges.ceiling, rng),
    }
}

/// Jitters each piece of furniture within a disc of its configured radius
/// and by up to ±15° of yaw. Pieces with a zero radius stay put.
pub fn jitter_furniture<R: Rng + ?Sized>(furniture: &[Furniture], rng: &mut R) -> Vec<PlacedFurniture> {
    furniture
        .iter()
        .map(|f| {
            let pose = if f.jitter_radius > 0.0 {
                let r = f.jitter_radius * rng.gen_range(0.0..=1.0f64).sqrt();
                let theta = rng.gen_range(0.0..TAU);
                let lim = FURNITURE_YAW_JITTER_DEG.to_radians();
                let dyaw = rng.gen_range(-lim..=lim);
                let offset = Vec3::new(r * theta.cos(), r * theta.sin(), 0.0);
                let yaw = Quat::from_yaw(dyaw);
                Pose::new(f.nominal.translation + offset, yaw * f.nominal.rotation)
            } else {
                f.nominal
            };
            PlacedFurniture { name: f.name.clone(), pose, albedo: f.albedo, mesh: Arc::clone(&f.mesh) }
        })
        .collect()
}

/// Camera on a sphere around `target` looking at it.
pub fn sample_camera<R: Rng + ?Sized>(
    target: Vec3,
    params: &CameraSampling,
    rng: &mut R,
) -> Result<Camera, SceneError> {
    params.validate()?;
    let [r_lo, r_hi] = params.radius_range;
    let [e_lo, e_hi] = params.elevation_range_deg;
    let radius = uniform(rng, r_lo, r_hi);
    let azimuth = rng.gen_range(0.0..TAU);
    let elevation = uniform(rng, e_lo, e_hi).to_radians();
    let dir = Vec3::new(elevation.cos() * azimuth.cos(), elevation.cos() * azimuth.sin(), elevation.sin());
    let position = target + dir * radius;
    Ok(Camera::look_at(position, target, params.intrinsics, params.width, params.height)?)
}

/// Samples one complete shot from a validated template.
pub fn build_scene_instance<R: Rng + ?Sized>(spec: &SceneSpec, rng: &mut R) -> Result<SceneInstance, SceneError> {
    if spec.regions.is_empty() {
        return Err(SceneError::InvalidParameter("scene has no placement regions".into()));
    }
    let furniture = jitter_furniture(&spec.furniture, rng);
    let light = sample_light(rng);
    let backgrounds = sample_backgrounds(&spec.backgrounds, rng);
    let [lo, hi] = spec.objects_per_scene;
    let count = rng.gen_range(lo..=hi) as usize;
    let region = &spec.regions[rng.gen_range(0..spec.regions.len())];
    let objects = place_objects(&spec.library, region, count, rng)?;
    let camera = sample_camera(region.center(), &spec.camera, rng)?;
    Ok(SceneInstance {
        furniture,
        region: region.name.clone(),
        objects,
        light,
        backgrounds,
        camera,
        environment: Arc::clone(&spec.environment),
    })
}
