//! Render one shot and write the color image and a false-color id map.
//!
//!     cargo run --example render_shot -- out_dir 5

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use synthseg::render::netpbm::encode_ppm;
use synthseg::scene::{build_scene_instance, load_scene_spec};
use synthseg::{derive_seed, rasterize, FrameBuffers};

fn main() {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "render_shot_out".into()));
    let index: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let spec = load_scene_spec(concat!(env!("CARGO_MANIFEST_DIR"), "/assets/tabletop.json")).expect("valid spec");
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(0, index));
    let scene = build_scene_instance(&spec, &mut rng).expect("scene fits");
    let fb = rasterize(&scene);

    // spread instance ids over the hue circle so neighbours are distinguishable
    let ids_rgb: Vec<u8> = fb
        .id
        .iter()
        .flat_map(|&id| {
            if id == 0 {
                [0, 0, 0]
            } else {
                let h = (id as f64 * 0.618034).fract() * 6.0;
                let x = (255.0 * (1.0 - (h % 2.0 - 1.0).abs())) as u8;
                match h as u32 {
                    0 => [255, x, 0],
                    1 => [x, 255, 0],
                    2 => [0, 255, x],
                    3 => [0, x, 255],
                    4 => [x, 0, 255],
                    _ => [255, 0, x],
                }
            }
        })
        .collect();

    std::fs::create_dir_all(&out).expect("output directory");
    std::fs::write(out.join("color.ppm"), encode_ppm(&fb)).expect("write");
    let false_color = FrameBuffers { rgb: ids_rgb, ..fb.clone() };
    std::fs::write(out.join("ids.ppm"), encode_ppm(&false_color)).expect("write");
    let visible: std::collections::BTreeSet<u32> = fb.id.iter().copied().filter(|&i| i != 0).collect();
    println!(
        "{}x{}, {} triangles, {} of {} objects visible; wrote {}",
        fb.width,
        fb.height,
        scene.triangle_count(),
        visible.len(),
        scene.objects.len(),
        out.display()
    );
}
