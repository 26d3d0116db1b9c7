//! Command-line front end. Exit codes: 0 success, 1 usage error, 2 spec
//! error, 3 I/O error, 4 unsatisfiable scenes.

use crate::annotate::DEFAULT_MIN_PIXELS;
use crate::pipeline::{bench, generate_dataset, generate_image, JobConfig, PipelineError};
use crate::scene::{load_scene_spec, SpecError};
use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::io::Write as _;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SPEC: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_UNSATISFIABLE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "synthseg", version, about = "Synthetic instance-segmentation dataset generator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a dataset: images, id maps, annotations.json and report.json.
    Generate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        num: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
        #[arg(long, default_value_t = DEFAULT_MIN_PIXELS)]
        min_pixels: u32,
        /// Override the spec's image width (intrinsics are rescaled).
        #[arg(long, requires = "height")]
        width: Option<u32>,
        #[arg(long, requires = "width")]
        height: Option<u32>,
    },
    /// Parse a scene spec and run the semantic checks.
    ValidateSpec {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Render a single image and print its annotations.
    Preview {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        index: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MIN_PIXELS)]
        min_pixels: u32,
    },
    /// Measure throughput on the built-in tabletop scene.
    Bench {
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
        #[arg(long, default_value_t = 2000)]
        num: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 320)]
        width: u32,
        #[arg(long, default_value_t = 240)]
        height: u32,
    },
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn exit_code(err: &PipelineError) -> i32 {
    match err {
        PipelineError::Spec(_) => EXIT_SPEC,
        PipelineError::Io { .. } => EXIT_IO,
        PipelineError::SceneUnsatisfiable { .. } => EXIT_UNSATISFIABLE,
        PipelineError::InvalidConfig(_) => EXIT_USAGE,
        PipelineError::Scene(_) | PipelineError::Annotate(_) | PipelineError::Netpbm(_) => EXIT_SPEC,
    }
}

fn spec_exit(err: SpecError) -> i32 {
    eprintln!("error: {err}");
    match err {
        SpecError::Io { .. } => EXIT_IO,
        _ => EXIT_SPEC,
    }
}

fn fail(err: PipelineError) -> i32 {
    eprintln!("error: {err}");
    exit_code(&err)
}

/// Prints to stdout, ignoring a closed pipe.
fn print_json<T: serde::Serialize>(value: &T) {
    let text = serde_json::to_string_pretty(value).expect("value serializes");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn write(path: PathBuf, bytes: &[u8]) -> Result<(), PipelineError> {
    std::fs::write(&path, bytes).map_err(|source| PipelineError::Io { path, source })
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };

    match cli.command {
        Command::Generate { spec, out, num, seed, workers, min_pixels, width, height } => {
            let config = JobConfig {
                scene_spec_path: spec,
                output_dir: out,
                num_images: num,
                global_seed: seed,
                workers,
                min_pixels,
                image_size: width.zip(height),
            };
            match generate_dataset(&config) {
                Ok(run) => {
                    let r = &run.report;
                    eprintln!(
                        "generated {} images ({} skipped) in {:.2}s, {:.1} images/s",
                        r.images_generated, r.images_skipped, r.wall_seconds, r.images_per_second
                    );
                    if r.images_skipped > 0 {
                        eprintln!("unsatisfiable scenes at indices {:?}", r.skipped_indices);
                        EXIT_UNSATISFIABLE
                    } else {
                        EXIT_OK
                    }
                }
                Err(e) => fail(e),
            }
        }
        Command::ValidateSpec { spec } => match load_scene_spec(&spec) {
            Ok(s) => {
                eprintln!(
                    "ok: {} classes, {} regions, {} furniture pieces",
                    s.library.len(),
                    s.regions.len(),
                    s.furniture.len()
                );
                EXIT_OK
            }
            Err(e) => spec_exit(e),
        },
        Command::Preview { spec, out, index, seed, min_pixels } => {
            if min_pixels == 0 {
                return fail(PipelineError::InvalidConfig("min_pixels must be at least 1".into()));
            }
            let spec = match load_scene_spec(&spec) {
                Ok(s) => s,
                Err(e) => return spec_exit(e),
            };
            let result = (|| {
                std::fs::create_dir_all(&out).map_err(|source| PipelineError::Io { path: out.clone(), source })?;
                let image = generate_image(&spec, index, seed, min_pixels)?;
                write(out.join(image.image_file()), &image.ppm_bytes())?;
                write(out.join(image.id_file()), &image.pgm_bytes()?)?;
                Ok::<_, PipelineError>(image)
            })();
            match result {
                Ok(image) => {
                    print_json(&image.annotations);
                    EXIT_OK
                }
                Err(e) => fail(e),
            }
        }
        Command::Bench { workers, num, seed, width, height } => {
            if width == 0 || height == 0 {
                return fail(PipelineError::InvalidConfig("image size must be non-zero".into()));
            }
            match bench(workers, num, seed, width, height) {
                Ok(report) => {
                    print_json(&report);
                    EXIT_OK
                }
                Err(e) => fail(e),
            }
        }
    }
}
