//! Sample object layouts for the bundled tabletop spec and print them.
//!
//!     cargo run --example place_objects -- 3

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use synthseg::derive_seed;
use synthseg::scene::{build_scene_instance, load_scene_spec};

fn main() {
    let n: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let spec = load_scene_spec(concat!(env!("CARGO_MANIFEST_DIR"), "/assets/tabletop.json")).expect("valid spec");
    let names: std::collections::HashMap<u32, &str> =
        spec.library.iter().map(|c| (c.class_id, c.class_name.as_str())).collect();
    for index in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(0, index));
        let scene = match build_scene_instance(&spec, &mut rng) {
            Ok(s) => s,
            Err(e) => {
                println!("scene {index}: {e}");
                continue;
            }
        };
        println!("scene {index}: {} objects in `{}`", scene.objects.len(), scene.region);
        for o in &scene.objects {
            let b = o.aabb();
            println!(
                "  #{:<2} {:<12} at ({:+.3}, {:+.3}) footprint x [{:+.3}, {:+.3}] y [{:+.3}, {:+.3}]",
                o.instance_id,
                names[&o.class_id],
                o.pose.translation.x,
                o.pose.translation.y,
                b.min.x,
                b.max.x,
                b.min.y,
                b.max.y
            );
        }
        let c = scene.camera.position();
        println!("  camera at ({:+.2}, {:+.2}, {:.2})", c.x, c.y, c.z);
    }
}
