//! JSON scene-spec files.
//!
//! Lengths are meters, angles degrees, colors floats in `[0, 1]`. Mesh
//! paths are resolved relative to the directory holding the spec file. A
//! mesh may instead be given as a `box` primitive with three extents.
//!
//! ```json
//! {
//!   "room": { "width": 6.0, "depth": 5.0, "height": 2.8 },
//!   "backgrounds": {
//!     "floor": { "color_min": [0.2, 0.2, 0.2], "color_max": [0.8, 0.7, 0.6],
//!                "checker_period_range": [0.2, 0.5] }
//!   },
//!   "furniture": [
//!     { "name": "table", "box": [1.4, 0.9, 0.72],
//!       "pose": { "translation": [0.0, 0.0, 0.36], "yaw_deg": 0.0 },
//!       "jitter_radius": 0.1, "albedo": [0.55, 0.4, 0.3] }
//!   ],
//!   "object_library": [
//!     { "class_id": 1, "name": "mug", "mesh_path": "meshes/mug.obj", "albedo": [0.8, 0.1, 0.1] }
//!   ],
//!   "regions": [ { "name": "table_top", "rect": [-0.6, -0.35, 0.6, 0.35], "support_z": 0.72 } ],
//!   "objects_per_scene": [4, 10],
//!   "camera": { "radius_range": [1.2, 2.0], "elevation_range_deg": [25.0, 70.0],
//!               "fx": 525.0, "fy": 525.0, "width": 640, "height": 480 }
//! }
//! ```
//!
//! `backgrounds` and each of its surfaces are optional. `cx`/`cy` default to
//! the image centre and furniture `albedo` to a neutral grey.

use super::{BackgroundRange, CameraSampling, Furniture, ObjectClass, PlacementRegion, Room, SceneSpec, Surfaces};
use crate::math::{Pose, Vec3};
use crate::mesh::{make_box, parse_obj, MeshError, TriangleMesh};
use crate::render::Intrinsics;
use serde::Deserialize;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use thiserror::Error;

/// Largest instance id the 16-bit id images can hold.
pub const MAX_OBJECTS_PER_SCENE: u32 = 65535;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("spec parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("mesh {path}: {source}")]
    Mesh { path: String, source: MeshError },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoomFile {
    width: f64,
    depth: f64,
    height: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BackgroundsFile {
    floor: Option<BackgroundRangeFile>,
    wall: Option<BackgroundRangeFile>,
    ceiling: Option<BackgroundRangeFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BackgroundRangeFile {
    color_min: Option<[f64; 3]>,
    color_max: Option<[f64; 3]>,
    checker_period_range: Option<[f64; 2]>,
}

impl BackgroundRangeFile {
    fn resolve(self) -> BackgroundRange {
        let d = BackgroundRange::default();
        BackgroundRange {
            color_min: self.color_min.unwrap_or(d.color_min),
            color_max: self.color_max.unwrap_or(d.color_max),
            checker_period_range: self.checker_period_range.unwrap_or(d.checker_period_range),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseFile {
    translation: [f64; 3],
    #[serde(default)]
    yaw_deg: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FurnitureFile {
    #[serde(default)]
    name: Option<String>,
    mesh_path: Option<String>,
    #[serde(rename = "box")]
    box_extents: Option<[f64; 3]>,
    pose: PoseFile,
    #[serde(default)]
    jitter_radius: f64,
    #[serde(default = "default_furniture_albedo")]
    albedo: [f64; 3],
}

fn default_furniture_albedo() -> [f64; 3] {
    [0.6, 0.6, 0.6]
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectClassFile {
    class_id: u32,
    name: String,
    mesh_path: Option<String>,
    #[serde(rename = "box")]
    box_extents: Option<[f64; 3]>,
    albedo: [f64; 3],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionFile {
    name: String,
    rect: [f64; 4],
    support_z: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CameraFile {
    radius_range: [f64; 2],
    elevation_range_deg: [f64; 2],
    fx: f64,
    fy: f64,
    cx: Option<f64>,
    cy: Option<f64>,
    width: u32,
    height: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneSpecFile {
    room: RoomFile,
    #[serde(default)]
    backgrounds: BackgroundsFile,
    #[serde(default)]
    furniture: Vec<FurnitureFile>,
    object_library: Vec<ObjectClassFile>,
    regions: Vec<RegionFile>,
    objects_per_scene: [u32; 2],
    camera: CameraFile,
}

fn load_mesh(
    base_dir: &Path,
    owner: &str,
    mesh_path: Option<&str>,
    box_extents: Option<[f64; 3]>,
) -> Result<TriangleMesh, SpecError> {
    match (mesh_path, box_extents) {
        (Some(rel), None) => {
            let path = base_dir.join(rel);
            let text = std::fs::read_to_string(&path).map_err(|source| SpecError::Io { path: path.clone(), source })?;
            let mut mesh = parse_obj(&text).map_err(|source| SpecError::Mesh { path: rel.to_string(), source })?;
            if mesh.name.is_empty() {
                mesh.name = owner.to_string();
            }
            Ok(mesh)
        }
        (None, Some(extents)) => {
            let mut mesh = make_box(Vec3::from(extents))
                .map_err(|source| SpecError::Mesh { path: format!("box for `{owner}`"), source })?;
            mesh.name = owner.to_string();
            Ok(mesh)
        }
        _ => Err(SpecError::Invalid(format!("`{owner}` needs exactly one of `mesh_path` or `box`"))),
    }
}

/// Reads and validates a scene-spec file.
pub fn load_scene_spec(path: impl AsRef<Path>) -> Result<SceneSpec, SpecError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io { path: path.to_path_buf(), source })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_scene_spec(&text, base)
}

/// Parses and validates a scene spec; mesh paths resolve against `base_dir`.
pub fn parse_scene_spec(text: &str, base_dir: &Path) -> Result<SceneSpec, SpecError> {
    let file: SceneSpecFile = serde_json::from_str(text).map_err(|e| SpecError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let room = Room { width: file.room.width, depth: file.room.depth, height: file.room.height };
    let bg = file.backgrounds;
    let range = |r: Option<BackgroundRangeFile>| r.map(BackgroundRangeFile::resolve).unwrap_or_default();
    let backgrounds = Surfaces { floor: range(bg.floor), wall: range(bg.wall), ceiling: range(bg.ceiling) };

    let furniture = file
        .furniture
        .into_iter()
        .enumerate()
        .map(|(i, f)| {
            let name = f.name.unwrap_or_else(|| format!("furniture_{i}"));
            let mesh = load_mesh(base_dir, &name, f.mesh_path.as_deref(), f.box_extents)?;
            Ok(Furniture {
                name,
                mesh: Arc::new(mesh),
                nominal: Pose::from_yaw(Vec3::from(f.pose.translation), f.pose.yaw_deg.to_radians()),
                jitter_radius: f.jitter_radius,
                albedo: f.albedo,
            })
        })
        .collect::<Result<Vec<_>, SpecError>>()?;

    let library = file
        .object_library
        .into_iter()
        .map(|c| {
            let mesh = load_mesh(base_dir, &c.name, c.mesh_path.as_deref(), c.box_extents)?;
            Ok(ObjectClass { class_id: c.class_id, class_name: c.name, mesh: Arc::new(mesh), base_albedo: c.albedo })
        })
        .collect::<Result<Vec<_>, SpecError>>()?;

    let regions = file
        .regions
        .into_iter()
        .map(|r| PlacementRegion { name: r.name, rect: r.rect, support_z: r.support_z })
        .collect();

    let cam = file.camera;
    let camera = CameraSampling {
        radius_range: cam.radius_range,
        elevation_range_deg: cam.elevation_range_deg,
        intrinsics: Intrinsics {
            fx: cam.fx,
            fy: cam.fy,
            cx: cam.cx.unwrap_or(0.5 * cam.width as f64),
            cy: cam.cy.unwrap_or(0.5 * cam.height as f64),
        },
        width: cam.width,
        height: cam.height,
    };

    let spec = SceneSpec::new(room, backgrounds, furniture, library, regions, file.objects_per_scene, camera);
    validate(&spec)?;
    Ok(spec)
}

fn unit_color(c: &[f64; 3]) -> bool {
    c.iter().all(|v| (0.0..=1.0).contains(v))
}

fn invalid<T>(msg: String) -> Result<T, SpecError> {
    Err(SpecError::Invalid(msg))
}

/// Semantic checks on a template.
pub(super) fn validate(spec: &SceneSpec) -> Result<(), SpecError> {
    let room = spec.room;
    if ![room.width, room.depth, room.height].iter().all(|v| *v > 0.0 && v.is_finite()) {
        return invalid(format!("room dimensions must be positive: {room:?}"));
    }

    for (kind, r) in
        [("floor", &spec.backgrounds.floor), ("wall", &spec.backgrounds.wall), ("ceiling", &spec.backgrounds.ceiling)]
    {
        let [p_lo, p_hi] = r.checker_period_range;
        let ordered = (0..3).all(|c| r.color_min[c] <= r.color_max[c]);
        if !unit_color(&r.color_min) || !unit_color(&r.color_max) || !ordered {
            return invalid(format!("{kind} background colors must satisfy 0 <= min <= max <= 1"));
        }
        if !(p_lo > 0.0 && p_lo <= p_hi && p_hi.is_finite()) {
            return invalid(format!("{kind} checker period range [{p_lo}, {p_hi}] must satisfy 0 < lo <= hi"));
        }
    }

    for f in &spec.furniture {
        if !(f.jitter_radius >= 0.0 && f.jitter_radius.is_finite()) {
            return invalid(format!("furniture `{}` has a negative jitter radius", f.name));
        }
        if !unit_color(&f.albedo) {
            return invalid(format!("furniture `{}` albedo outside [0, 1]", f.name));
        }
        if !f.nominal.is_valid() {
            return invalid(format!("furniture `{}` pose is not finite", f.name));
        }
    }

    let [lo, hi] = spec.objects_per_scene;
    if lo > hi {
        return invalid(format!("objects_per_scene [{lo}, {hi}] is not ordered"));
    }
    if hi > MAX_OBJECTS_PER_SCENE {
        return invalid(format!("objects_per_scene upper bound {hi} exceeds {MAX_OBJECTS_PER_SCENE}"));
    }

    if hi > 0 && spec.library.is_empty() {
        return invalid("object_library is empty but objects_per_scene allows objects".into());
    }
    let mut ids = BTreeSet::new();
    for c in &spec.library {
        if c.class_id == 0 {
            return invalid(format!("class `{}` has id 0; class ids start at 1", c.class_name));
        }
        if !ids.insert(c.class_id) {
            return invalid(format!("duplicate class id {}", c.class_id));
        }
        if c.class_name.trim().is_empty() {
            return invalid(format!("class {} has an empty name", c.class_id));
        }
        if !unit_color(&c.base_albedo) {
            return invalid(format!("class `{}` albedo outside [0, 1]", c.class_name));
        }
    }

    if spec.regions.is_empty() {
        return invalid("at least one placement region is required".into());
    }
    spec.camera.validate().map_err(|e| SpecError::Invalid(format!("camera: {e}")))?;
    let [_, r_hi] = spec.camera.radius_range;
    let [e_lo, e_hi] = spec.camera.elevation_range_deg;
    let reach_xy = r_hi * e_lo.to_radians().cos();
    let reach_z = r_hi * e_hi.to_radians().sin();

    let mut names = BTreeSet::new();
    for r in &spec.regions {
        if !names.insert(r.name.as_str()) {
            return invalid(format!("duplicate region name `{}`", r.name));
        }
        let [x0, y0, x1, y1] = r.rect;
        if !(x0 < x1 && y0 < y1) {
            return invalid(format!("region `{}` has an empty rectangle {:?}", r.name, r.rect));
        }
        let inside =
            room.contains_xy(x0, y0) && room.contains_xy(x1, y1) && r.support_z >= 0.0 && r.support_z < room.height;
        if !inside {
            return invalid(format!("region `{}` lies outside the room", r.name));
        }
        let c = r.center();
        let camera_inside = room.contains_xy(c.x - reach_xy, c.y - reach_xy)
            && room.contains_xy(c.x + reach_xy, c.y + reach_xy)
            && c.z + reach_z < room.height;
        if !camera_inside {
            return invalid(format!("cameras aimed at region `{}` can leave the room; shrink radius_range", r.name));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC: &str = r#"{
      "room": { "width": 6.0, "depth": 5.0, "height": 3.0 },
      "furniture": [ { "name": "table", "box": [1.4, 0.9, 0.72],
                       "pose": { "translation": [0.0, 0.0, 0.36], "yaw_deg": 0.0 } } ],
      "object_library": [ { "class_id": 1, "name": "cube", "box": [0.1, 0.1, 0.1], "albedo": [0.8, 0.1, 0.1] } ],
      "regions": [ { "name": "table_top", "rect": [-0.6, -0.35, 0.6, 0.35], "support_z": 0.72 } ],
      "objects_per_scene": [1, 3],
      "camera": { "radius_range": [1.2, 2.0], "elevation_range_deg": [25.0, 70.0],
                  "fx": 300.0, "fy": 300.0, "width": 320, "height": 240 }
    }"#;

    #[test]
    fn parses_example() {
        let spec = parse_scene_spec(SPEC, Path::new(".")).unwrap();
        assert_eq!(spec.library[0].mesh.faces.len(), 12);
        assert_eq!(spec.camera.intrinsics.cx, 160.0);
        assert_eq!(spec.backgrounds.floor, BackgroundRange::default());
    }

    #[test]
    fn region_outside_room_is_named() {
        let text = SPEC.replace("[-0.6, -0.35, 0.6, 0.35]", "[2.0, 2.0, 4.0, 3.0]");
        let err = parse_scene_spec(&text, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("table_top"), "{err}");
    }

    #[test]
    fn parse_error_has_position() {
        let err = parse_scene_spec("{\n  \"room\": 3,\n}", Path::new(".")).unwrap_err();
        match err {
            SpecError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_mesh_file() {
        let text = SPEC.replace(r#""box": [0.1, 0.1, 0.1]"#, r#""mesh_path": "nope.obj""#);
        let err = parse_scene_spec(&text, Path::new("/nonexistent")).unwrap_err();
        assert!(matches!(err, SpecError::Io { .. }));
    }

    #[test]
    fn camera_leaving_room_rejected() {
        let text = SPEC.replace("[1.2, 2.0]", "[1.2, 4.0]");
        assert!(matches!(parse_scene_spec(&text, Path::new(".")), Err(SpecError::Invalid(_))));
    }
}
