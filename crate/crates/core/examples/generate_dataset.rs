//! Generate a small dataset with the library API and summarize the manifest.
//!
//!     cargo run --example generate_dataset -- out_dir 20 4

use std::path::PathBuf;
use synthseg::{generate_dataset, JobConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "dataset_out".into()));
    let num: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let workers: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(2);
    let config = JobConfig {
        scene_spec_path: concat!(env!("CARGO_MANIFEST_DIR"), "/assets/tabletop.json").into(),
        output_dir: out.clone(),
        num_images: num,
        global_seed: 0,
        workers,
        min_pixels: 32,
        image_size: Some((320, 240)),
    };
    let run = generate_dataset(&config).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        std::process::exit(1);
    });
    let m = &run.manifest;
    println!("{} images, {} annotations in {}", m.images.len(), m.annotations.len(), out.display());
    for c in &m.categories {
        let n = m.annotations.iter().filter(|a| a.category_id == c.id).count();
        println!("  {:<12} {n}", c.name);
    }
    println!("{:.1} images/s on {} workers", run.report.images_per_second, run.report.workers);
}
