//! Render one shot, annotate it and check each RLE decodes back to its mask.
//!
//!     cargo run --example annotate_shot -- 3

use synthseg::annotate::{bbox_of, decode_rle};
use synthseg::generate_image;
use synthseg::scene::load_scene_spec;

fn main() {
    let index: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let spec = load_scene_spec(concat!(env!("CARGO_MANIFEST_DIR"), "/assets/tabletop.json")).expect("valid spec");
    let image = generate_image(&spec, index, 0, 32).expect("scene fits");
    println!("{} ({}x{})", image.image_file(), image.frame.width, image.frame.height);
    for a in &image.annotations {
        let mask = decode_rle(&a.rle.counts, image.frame.width, image.frame.height).expect("valid RLE");
        assert_eq!(mask.count(), a.area);
        assert_eq!(bbox_of(&mask).unwrap(), a.bbox);
        println!(
            "  instance {:<2} category {} area {:>6} bbox {:?} ({} runs)",
            a.instance_id,
            a.category_id,
            a.area,
            a.bbox,
            a.rle.counts.len()
        );
    }
    let hidden = image.scene.objects.len() - image.annotations.len();
    println!("{} annotated, {hidden} hidden or below the pixel threshold", image.annotations.len());
}
