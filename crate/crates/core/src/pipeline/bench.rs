use super::{run, PipelineError, RunParams, Sink, ThroughputReport};
use crate::annotate::DEFAULT_MIN_PIXELS;
use crate::math::{Pose, Vec3};
use crate::mesh::make_box;
use crate::render::Intrinsics;
use crate::scene::{
    BackgroundRange, CameraSampling, Furniture, ObjectClass, PlacementRegion, Room, SceneSpec, Surfaces,
};
use std::sync::Arc;

/// Fixed tabletop template for throughput measurements: a table in a
/// 6 m x 5 m room with 8 to 12 box-shaped objects on it.
pub fn bench_spec(width: u32, height: u32) -> SceneSpec {
    let room = Room { width: 6.0, depth: 5.0, height: 2.8 };
    let table = Furniture {
        name: "table".into(),
        mesh: Arc::new(make_box(Vec3::new(1.6, 1.0, 0.74)).expect("positive extents")),
        nominal: Pose::from_yaw(Vec3::new(0.0, 0.0, 0.37), 0.0),
        jitter_radius: 0.05,
        albedo: [0.55, 0.42, 0.3],
    };
    let shelf = Furniture {
        name: "shelf".into(),
        mesh: Arc::new(make_box(Vec3::new(0.4, 1.2, 1.8)).expect("positive extents")),
        nominal: Pose::from_yaw(Vec3::new(-2.6, 1.0, 0.9), 0.0),
        jitter_radius: 0.1,
        albedo: [0.35, 0.35, 0.4],
    };
    let classes: [(&str, [f64; 3], [f64; 3]); 6] = [
        ("cracker_box", [0.16, 0.06, 0.21], [0.85, 0.2, 0.15]),
        ("sugar_box", [0.09, 0.04, 0.17], [0.95, 0.9, 0.5]),
        ("mug", [0.09, 0.09, 0.1], [0.2, 0.3, 0.8]),
        ("tuna_can", [0.085, 0.085, 0.035], [0.3, 0.35, 0.5]),
        ("jello_box", [0.09, 0.03, 0.07], [0.9, 0.1, 0.4]),
        ("spam_can", [0.1, 0.06, 0.08], [0.2, 0.4, 0.75]),
    ];
    let library = classes
        .iter()
        .enumerate()
        .map(|(i, (name, extents, albedo))| ObjectClass {
            class_id: i as u32 + 1,
            class_name: name.to_string(),
            mesh: Arc::new(make_box(Vec3::from(*extents)).expect("positive extents")),
            base_albedo: *albedo,
        })
        .collect();
    let region = PlacementRegion { name: "table_top".into(), rect: [-0.7, -0.42, 0.7, 0.42], support_z: 0.74 };
    let camera = CameraSampling {
        radius_range: [1.0, 1.7],
        elevation_range_deg: [30.0, 70.0],
        intrinsics: Intrinsics { fx: 260.0, fy: 260.0, cx: 160.0, cy: 120.0 },
        width: 320,
        height: 240,
    }
    .with_image_size(width, height);
    let bg = BackgroundRange::default();
    SceneSpec::new(
        room,
        Surfaces { floor: bg, wall: bg, ceiling: bg },
        vec![table, shelf],
        library,
        vec![region],
        [8, 12],
        camera,
    )
}

/// Generates `num_images` images of [`bench_spec`] in memory and reports
/// throughput.
pub fn bench(
    workers: usize,
    num_images: u64,
    global_seed: u64,
    width: u32,
    height: u32,
) -> Result<ThroughputReport, PipelineError> {
    let spec = bench_spec(width, height);
    let params = RunParams { num_images, global_seed, workers, min_pixels: DEFAULT_MIN_PIXELS };
    Ok(run(&spec, &params, Sink::Discard)?.report)
}
