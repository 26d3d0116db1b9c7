//! Run the in-memory benchmark for 1, 2 and 4 workers and print speedups.
//!
//!     cargo run --release --example throughput_scaling -- 500

use synthseg::pipeline::bench;

fn main() {
    let num: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(400);
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    println!("{num} images at 320x240, {cores} core(s) available");
    let mut base = None;
    for workers in [1, 2, 4] {
        let r = bench(workers, num, 0, 320, 240).expect("bench scene is valid");
        let base_rate = *base.get_or_insert(r.images_per_second);
        println!(
            "workers {workers}: {:7.1} images/s  median {:5.2} ms  speedup {:.2}x  per worker {:?}",
            r.images_per_second,
            r.median_image_ms,
            r.images_per_second / base_rate,
            r.per_worker_image_counts
        );
    }
}
