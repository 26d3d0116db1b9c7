//! Instance masks, boxes and run-length encodings read off id buffers, and
//! the COCO-style manifest that indexes a generated dataset.
//!
//! RLE counts walk the mask in column-major order (down column 0, then
//! column 1, ...) and alternate between runs of 0s and 1s, starting with
//! 0s; the first count is 0 when the first pixel is set.

use crate::render::FrameBuffers;
use crate::scene::{ObjectClass, SceneInstance};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Instances covering fewer pixels than this get no annotation by default.
pub const DEFAULT_MIN_PIXELS: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnnotateError {
    #[error("mask has no set pixels")]
    EmptyMask,
    #[error("RLE counts sum to {sum}, expected {expected}")]
    BadRle { sum: u64, expected: u64 },
    #[error("file name `{0}` used by more than one image")]
    DuplicateFileName(String),
}

/// Row-major boolean image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    pub width: u32,
    pub height: u32,
    pub bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32) -> Self {
        BinaryMask { width, height, bits: vec![false; width as usize * height as usize] }
    }

    pub fn get(&self, row: u32, col: u32) -> bool {
        self.bits[row as usize * self.width as usize + col as usize]
    }

    pub fn set(&mut self, row: u32, col: u32, value: bool) {
        self.bits[row as usize * self.width as usize + col as usize] = value;
    }

    pub fn count(&self) -> u64 {
        self.bits.iter().filter(|&&b| b).count() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceMask {
    pub instance_id: u32,
    pub mask: BinaryMask,
}

/// One mask per instance id with at least `min_pixels` pixels, in
/// ascending id order.
pub fn extract_instances(ids: &[u32], width: u32, height: u32, min_pixels: u32) -> Vec<InstanceMask> {
    assert_eq!(ids.len(), width as usize * height as usize, "id buffer size mismatch");
    let mut tally: BTreeMap<u32, u64> = BTreeMap::new();
    for &id in ids.iter().filter(|&&id| id != 0) {
        *tally.entry(id).or_default() += 1;
    }
    tally
        .into_iter()
        .filter(|&(_, n)| n >= u64::from(min_pixels.max(1)))
        .map(|(instance_id, _)| InstanceMask {
            instance_id,
            mask: BinaryMask { width, height, bits: ids.iter().map(|&id| id == instance_id).collect() },
        })
        .collect()
}

/// Tight `[x, y, w, h]` box in pixels.
pub fn bbox_of(mask: &BinaryMask) -> Result<[u32; 4], AnnotateError> {
    let mut min_col = u32::MAX;
    let mut max_col = 0;
    let mut min_row = u32::MAX;
    let mut max_row = 0;
    for row in 0..mask.height {
        for col in 0..mask.width {
            if mask.get(row, col) {
                min_col = min_col.min(col);
                max_col = max_col.max(col);
                min_row = min_row.min(row);
                max_row = max_row.max(row);
            }
        }
    }
    if min_col == u32::MAX {
        return Err(AnnotateError::EmptyMask);
    }
    Ok([min_col, min_row, max_col - min_col + 1, max_row - min_row + 1])
}

pub fn encode_rle(mask: &BinaryMask) -> Vec<u32> {
    let mut counts = Vec::new();
    let mut current = false;
    let mut run = 0u32;
    for col in 0..mask.width {
        for row in 0..mask.height {
            let bit = mask.get(row, col);
            if bit != current {
                counts.push(run);
                current = bit;
                run = 0;
            }
            run += 1;
        }
    }
    counts.push(run);
    counts
}

pub fn decode_rle(counts: &[u32], width: u32, height: u32) -> Result<BinaryMask, AnnotateError> {
    let expected = u64::from(width) * u64::from(height);
    let sum: u64 = counts.iter().map(|&c| u64::from(c)).sum();
    if sum != expected {
        return Err(AnnotateError::BadRle { sum, expected });
    }
    let mut mask = BinaryMask::new(width, height);
    let mut k = 0u64;
    for (i, &run) in counts.iter().enumerate() {
        let value = i % 2 == 1;
        for _ in 0..run {
            if value {
                let col = (k / u64::from(height)) as u32;
                let row = (k % u64::from(height)) as u32;
                mask.set(row, col, true);
            }
            k += 1;
        }
    }
    Ok(mask)
}

/// Uncompressed COCO RLE; `size` is `[height, width]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rle {
    pub size: [u32; 2],
    pub counts: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub id: u64,
    pub image_id: u64,
    pub category_id: u32,
    pub bbox: [u32; 4],
    pub area: u64,
    pub segmentation: Rle,
    pub iscrowd: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub id: u64,
    pub file_name: String,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryRecord {
    pub id: u32,
    pub name: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub images: Vec<ImageRecord>,
    pub annotations: Vec<AnnotationRecord>,
    pub categories: Vec<CategoryRecord>,
}

impl DatasetManifest {
    pub fn to_json_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec(self).expect("manifest serializes");
        out.push(b'\n');
        out
    }
}

/// Annotation of one visible instance before dataset-wide ids are assigned.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InstanceAnnotation {
    pub instance_id: u32,
    pub category_id: u32,
    pub bbox: [u32; 4],
    pub area: u64,
    pub rle: Rle,
}

/// Everything the manifest needs to know about one rendered image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageAnnotations {
    pub image_id: u64,
    pub file_name: String,
    pub width: u32,
    pub height: u32,
    pub instances: Vec<InstanceAnnotation>,
}

/// Annotates the visible instances of one rendered shot.
pub fn annotate_frame(scene: &SceneInstance, fb: &FrameBuffers, min_pixels: u32) -> Vec<InstanceAnnotation> {
    let classes: BTreeMap<u32, u32> = scene.objects.iter().map(|o| (o.instance_id, o.class_id)).collect();
    extract_instances(&fb.id, fb.width, fb.height, min_pixels)
        .into_iter()
        .map(|inst| {
            let bbox = bbox_of(&inst.mask).expect("extracted masks are non-empty");
            InstanceAnnotation {
                instance_id: inst.instance_id,
                category_id: *classes.get(&inst.instance_id).expect("id buffer only holds ids of scene objects"),
                bbox,
                area: inst.mask.count(),
                rle: Rle { size: [fb.height, fb.width], counts: encode_rle(&inst.mask) },
            }
        })
        .collect()
}

pub fn categories_of(library: &[ObjectClass]) -> Vec<CategoryRecord> {
    let mut cats: Vec<_> =
        library.iter().map(|c| CategoryRecord { id: c.class_id, name: c.class_name.clone() }).collect();
    cats.sort_by_key(|c| c.id);
    cats
}

/// Assembles the manifest. Images are ordered by id and annotation ids
/// count up from 1 in (image id, instance id) order.
pub fn build_manifest(
    mut images: Vec<ImageAnnotations>,
    mut categories: Vec<CategoryRecord>,
) -> Result<DatasetManifest, AnnotateError> {
    images.sort_by_key(|i| i.image_id);
    categories.sort_by_key(|c| c.id);
    let mut names = BTreeSet::new();
    let mut manifest = DatasetManifest { categories, ..Default::default() };
    let mut next_id = 1u64;
    for img in images {
        if !names.insert(img.file_name.clone()) {
            return Err(AnnotateError::DuplicateFileName(img.file_name));
        }
        let mut instances = img.instances;
        instances.sort_by_key(|a| a.instance_id);
        for a in instances {
            manifest.annotations.push(AnnotationRecord {
                id: next_id,
                image_id: img.image_id,
                category_id: a.category_id,
                bbox: a.bbox,
                area: a.area,
                segmentation: a.rle,
                iscrowd: 0,
            });
            next_id += 1;
        }
        manifest.images.push(ImageRecord {
            id: img.image_id,
            file_name: img.file_name,
            width: img.width,
            height: img.height,
        });
    }
    Ok(manifest)
}
