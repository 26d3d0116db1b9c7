//! Deterministic, parallel generation of synthetic instance-segmentation
//! datasets.
//!
//! A [`scene::SceneSpec`] describes a room, furniture, a library of object
//! meshes and the table-top regions objects may be placed in. For every
//! image the generator samples a concrete [`scene::SceneInstance`]
//! (furniture jitter, object placement, lighting, background textures,
//! camera), renders it with the software rasterizer in [`render`] and reads
//! pixel-exact masks, boxes and RLE segmentations off the instance-id
//! buffer ([`annotate`]). [`pipeline`] fans this out over worker threads and
//! writes a COCO-style `annotations.json`.
//!
//! Output bytes depend only on the spec, the global seed and the image
//! index, never on the number of workers.

pub mod annotate;
pub mod cli;
pub mod math;
pub mod mesh;
pub mod pipeline;
pub mod render;
pub mod scene;

pub use annotate::{AnnotationRecord, DatasetManifest};
pub use math::{Pose, Quat, Vec3};
pub use mesh::{Aabb, TriangleMesh};
pub use pipeline::{derive_seed, generate_dataset, generate_image, JobConfig, ThroughputReport};
pub use render::{rasterize, Camera, FrameBuffers};
pub use scene::{build_scene_instance, SceneInstance, SceneSpec};
