//! Parse an OBJ file and print its size and bounds under a few poses.
//!
//!     cargo run --example parse_mesh -- crates/core/assets/meshes/bowl.obj

use synthseg::mesh::{compute_aabb, parse_obj};
use synthseg::{Pose, Vec3};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/assets/meshes/book.obj").to_string());
    let text = std::fs::read_to_string(&path).expect("readable OBJ file");
    let mesh = match parse_obj(&text) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{path}: {e}");
            std::process::exit(2);
        }
    };
    println!(
        "{path}: name `{}`, {} vertices, {} triangles, normals: {}",
        mesh.name,
        mesh.vertices.len(),
        mesh.faces.len(),
        mesh.normals.is_some()
    );
    for yaw_deg in [0.0f64, 30.0, 45.0, 90.0] {
        let b = compute_aabb(&mesh, &Pose::from_yaw(Vec3::ZERO, yaw_deg.to_radians()));
        let e = b.extents();
        println!("yaw {yaw_deg:>4}°: extents {:.4} x {:.4} x {:.4}", e.x, e.y, e.z);
    }
}
