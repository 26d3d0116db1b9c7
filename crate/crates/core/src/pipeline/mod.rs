//! Parallel dataset generation.
//!
//! Every image draws from its own generator seeded by
//! [`derive_seed`]`(global_seed, index)`, so an image's bytes depend only on
//! the template, the global seed and its index. Workers pull indices from a
//! shared counter and the manifest is reduced in index order afterwards,
//! which makes the output independent of the worker count and scheduling.

mod bench;

pub use bench::{bench, bench_spec};

use crate::annotate::{
    annotate_frame, build_manifest, categories_of, AnnotateError, DatasetManifest, ImageAnnotations, InstanceAnnotation,
};
use crate::render::netpbm::{encode_id_pgm, encode_ppm, NetpbmError};
use crate::render::{rasterize, FrameBuffers};
use crate::scene::{build_scene_instance, load_scene_spec, SceneError, SceneInstance, SceneSpec, SpecError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Scene sampling is retried this many times after a crowded placement
/// before the image is skipped.
pub const MAX_SCENE_RETRIES: usize = 10;

pub const MANIFEST_FILE: &str = "annotations.json";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("I/O failure on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("image {index}: no uncrowded scene after {retries} retries")]
    SceneUnsatisfiable { index: u64, retries: usize },
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Annotate(#[from] AnnotateError),
    #[error(transparent)]
    Netpbm(#[from] NetpbmError),
    #[error("invalid job configuration: {0}")]
    InvalidConfig(String),
}

/// Per-image seed: a splitmix64 finalizer over
/// `global_seed + index * 0x9E3779B97F4A7C15` (wrapping).
pub fn derive_seed(global_seed: u64, image_index: u64) -> u64 {
    let mut z = global_seed.wrapping_add(image_index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn image_file_name(index: u64) -> String {
    format!("img_{index:08}.ppm")
}

pub fn id_file_name(index: u64) -> String {
    format!("ids_{index:08}.pgm")
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    pub scene_spec_path: PathBuf,
    pub output_dir: PathBuf,
    pub num_images: u64,
    pub global_seed: u64,
    pub workers: usize,
    pub min_pixels: u32,
    pub image_size: Option<(u32, u32)>,
}

impl JobConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.workers == 0 {
            return Err(PipelineError::InvalidConfig("workers must be at least 1".into()));
        }
        if self.min_pixels == 0 {
            return Err(PipelineError::InvalidConfig("min_pixels must be at least 1".into()));
        }
        if matches!(self.image_size, Some((0, _)) | Some((_, 0))) {
            return Err(PipelineError::InvalidConfig("image size must be non-zero".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThroughputReport {
    pub images_requested: u64,
    pub images_generated: u64,
    pub images_skipped: u64,
    pub skipped_indices: Vec<u64>,
    pub workers: usize,
    pub wall_seconds: f64,
    pub images_per_second: f64,
    pub median_image_ms: f64,
    pub per_worker_image_counts: Vec<u64>,
    pub triangle_count_mean: f64,
}

/// One rendered and annotated shot.
#[derive(Debug, Clone)]
pub struct GeneratedImage {
    pub index: u64,
    pub scene: SceneInstance,
    pub frame: FrameBuffers,
    pub annotations: Vec<InstanceAnnotation>,
}

impl GeneratedImage {
    pub fn image_file(&self) -> String {
        image_file_name(self.index)
    }

    pub fn id_file(&self) -> String {
        id_file_name(self.index)
    }

    pub fn ppm_bytes(&self) -> Vec<u8> {
        encode_ppm(&self.frame)
    }

    pub fn pgm_bytes(&self) -> Result<Vec<u8>, NetpbmError> {
        encode_id_pgm(&self.frame)
    }

    fn manifest_entry(&self) -> ImageAnnotations {
        ImageAnnotations {
            image_id: self.index,
            file_name: self.image_file(),
            width: self.frame.width,
            height: self.frame.height,
            instances: self.annotations.clone(),
        }
    }
}

/// Samples, renders and annotates image `index`.
pub fn generate_image(
    spec: &SceneSpec,
    image_index: u64,
    global_seed: u64,
    min_pixels: u32,
) -> Result<GeneratedImage, PipelineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(global_seed, image_index));
    let mut attempt = 0;
    let scene = loop {
        match build_scene_instance(spec, &mut rng) {
            Ok(scene) => break scene,
            Err(SceneError::TooCrowded { .. }) if attempt < MAX_SCENE_RETRIES => attempt += 1,
            Err(SceneError::TooCrowded { .. }) => {
                return Err(PipelineError::SceneUnsatisfiable { index: image_index, retries: MAX_SCENE_RETRIES })
            }
            Err(e) => return Err(e.into()),
        }
    };
    let frame = rasterize(&scene);
    let annotations = annotate_frame(&scene, &frame, min_pixels);
    Ok(GeneratedImage { index: image_index, scene, frame, annotations })
}

/// Where generated images go.
#[derive(Debug, Clone, Copy)]
pub enum Sink<'a> {
    /// Write `img_*.ppm` and `ids_*.pgm` into the directory.
    Directory(&'a Path),
    /// Encode the files but keep nothing (benchmarking).
    Discard,
}

#[derive(Debug, Clone, Copy)]
pub struct RunParams {
    pub num_images: u64,
    pub global_seed: u64,
    pub workers: usize,
    pub min_pixels: u32,
}

pub struct RunOutput {
    pub manifest: DatasetManifest,
    pub report: ThroughputReport,
}

struct WorkerResult {
    entries: Vec<ImageAnnotations>,
    skipped: Vec<u64>,
    timings: Vec<Duration>,
    triangles: u64,
}

fn write_file(path: PathBuf, bytes: &[u8]) -> Result<(), PipelineError> {
    std::fs::write(&path, bytes).map_err(|source| PipelineError::Io { path, source })
}

fn run_worker(
    spec: &SceneSpec,
    params: &RunParams,
    sink: Sink<'_>,
    next: &AtomicU64,
    abort: &AtomicBool,
) -> Result<WorkerResult, PipelineError> {
    let mut out = WorkerResult { entries: Vec::new(), skipped: Vec::new(), timings: Vec::new(), triangles: 0 };
    while !abort.load(Ordering::Relaxed) {
        let index = next.fetch_add(1, Ordering::Relaxed);
        if index >= params.num_images {
            break;
        }
        let started = Instant::now();
        let image = match generate_image(spec, index, params.global_seed, params.min_pixels) {
            Ok(image) => image,
            Err(PipelineError::SceneUnsatisfiable { .. }) => {
                out.skipped.push(index);
                continue;
            }
            Err(e) => return Err(e),
        };
        let ppm = image.ppm_bytes();
        let pgm = image.pgm_bytes()?;
        if let Sink::Directory(dir) = sink {
            write_file(dir.join(image.image_file()), &ppm)?;
            write_file(dir.join(image.id_file()), &pgm)?;
        }
        out.timings.push(started.elapsed());
        out.triangles += image.scene.triangle_count() as u64;
        out.entries.push(image.manifest_entry());
    }
    Ok(out)
}

fn median_ms(mut timings: Vec<Duration>) -> f64 {
    if timings.is_empty() {
        return 0.0;
    }
    timings.sort();
    let n = timings.len();
    let mid = if n % 2 == 1 {
        timings[n / 2].as_secs_f64()
    } else {
        0.5 * (timings[n / 2 - 1].as_secs_f64() + timings[n / 2].as_secs_f64())
    };
    mid * 1e3
}

/// Generates images `0..num_images` on `workers` threads and reduces the
/// manifest in index order. Does not write the manifest.
pub fn run(spec: &SceneSpec, params: &RunParams, sink: Sink<'_>) -> Result<RunOutput, PipelineError> {
    if params.workers == 0 {
        return Err(PipelineError::InvalidConfig("workers must be at least 1".into()));
    }
    let started = Instant::now();
    let next = AtomicU64::new(0);
    let abort = AtomicBool::new(false);
    let results: Mutex<Vec<(usize, Result<WorkerResult, PipelineError>)>> = Mutex::new(Vec::new());

    std::thread::scope(|scope| {
        for w in 0..params.workers {
            let (next, abort, results) = (&next, &abort, &results);
            scope.spawn(move || {
                let r = run_worker(spec, params, sink, next, abort);
                if r.is_err() {
                    abort.store(true, Ordering::Relaxed);
                }
                results.lock().expect("result lock").push((w, r));
            });
        }
    });

    let mut results = results.into_inner().expect("result lock");
    results.sort_by_key(|(w, _)| *w);
    let mut per_worker = vec![0u64; params.workers];
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    let mut timings = Vec::new();
    let mut triangles = 0u64;
    for (w, r) in results {
        let r = r?;
        per_worker[w] = r.entries.len() as u64;
        entries.extend(r.entries);
        skipped.extend(r.skipped);
        timings.extend(r.timings);
        triangles += r.triangles;
    }
    skipped.sort_unstable();

    let generated = entries.len() as u64;
    let manifest = build_manifest(entries, categories_of(&spec.library))?;
    let wall_seconds = started.elapsed().as_secs_f64().max(f64::MIN_POSITIVE);
    let report = ThroughputReport {
        images_requested: params.num_images,
        images_generated: generated,
        images_skipped: skipped.len() as u64,
        skipped_indices: skipped,
        workers: params.workers,
        wall_seconds,
        images_per_second: generated as f64 / wall_seconds,
        median_image_ms: median_ms(timings),
        per_worker_image_counts: per_worker,
        triangle_count_mean: if generated > 0 { triangles as f64 / generated as f64 } else { 0.0 },
    };
    Ok(RunOutput { manifest, report })
}

/// Loads the spec, renders every image into `output_dir`, then writes
/// `annotations.json` and `report.json`. Rerunning overwrites earlier
/// (possibly partial) output with identical bytes.
pub fn generate_dataset(config: &JobConfig) -> Result<RunOutput, PipelineError> {
    config.validate()?;
    let mut spec = load_scene_spec(&config.scene_spec_path)?;
    if let Some((w, h)) = config.image_size {
        spec = spec.with_image_size(w, h);
        spec.validate()?;
    }
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(|source| PipelineError::Io { path: dir.clone(), source })?;
    let params = RunParams {
        num_images: config.num_images,
        global_seed: config.global_seed,
        workers: config.workers,
        min_pixels: config.min_pixels,
    };
    let out = run(&spec, &params, Sink::Directory(dir))?;
    let report_json = serde_json::to_vec_pretty(&out.report).expect("report serializes");
    write_file(dir.join(REPORT_FILE), &report_json)?;
    write_file(dir.join(MANIFEST_FILE), &out.manifest.to_json_bytes())?;
    Ok(out)
}
