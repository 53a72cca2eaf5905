use std::collections::BTreeMap;
use std::path::Path;

use super::types::{InstanceMask, MaskGrid, Masklet, VideoManifest};
use super::SceneError;

/// Name of the id->category table expected next to the mask images.
pub const CATEGORY_SIDECAR: &str = "categories.json";

/// Reads the category sidecar from the directory containing `mask_path`.
/// A missing sidecar is not an error; ids then fall back to `object_<id>`.
pub fn read_category_sidecar(mask_path: &Path) -> Result<BTreeMap<u32, String>, SceneError> {
    let dir = match mask_path.parent() {
        Some(d) => d,
        None => return Ok(BTreeMap::new()),
    };
    let sidecar = dir.join(CATEGORY_SIDECAR);
    if !sidecar.is_file() {
        return Ok(BTreeMap::new());
    }
    let text = std::fs::read_to_string(&sidecar).map_err(|source| SceneError::Io {
        path: sidecar.clone(),
        source,
    })?;
    let raw: BTreeMap<String, String> =
        serde_json::from_str(&text).map_err(|e| SceneError::CorruptAsset {
            path: sidecar.clone(),
            detail: e.to_string(),
        })?;
    let mut out = BTreeMap::new();
    for (k, v) in raw {
        let id: u32 = k.parse().map_err(|_| SceneError::CorruptAsset {
            path: sidecar.clone(),
            detail: format!("non-integer object id {k:?}"),
        })?;
        out.insert(id, v);
    }
    Ok(out)
}

/// Decodes a single-channel indexed mask image: pixel value = object_id,
/// 0 = background. Returns one mask per object present, sorted by id.
pub fn decode_masks(
    path: &Path,
    categories: &BTreeMap<u32, String>,
) -> Result<Vec<InstanceMask>, SceneError> {
    let bytes = std::fs::read(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            SceneError::MissingAsset {
                path: path.to_path_buf(),
            }
        } else {
            SceneError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    let img = image::load_from_memory(&bytes).map_err(|e| SceneError::CorruptAsset {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    let (ids, width, height): (Vec<u32>, u32, u32) = match img {
        image::DynamicImage::ImageLuma8(b) => {
            let (w, h) = (b.width(), b.height());
            (b.into_raw().into_iter().map(u32::from).collect(), w, h)
        }
        image::DynamicImage::ImageLuma16(b) => {
            let (w, h) = (b.width(), b.height());
            (b.into_raw().into_iter().map(u32::from).collect(), w, h)
        }
        other => {
            return Err(SceneError::UnsupportedEncoding {
                path: path.to_path_buf(),
                detail: format!("mask image must be single-channel, got {:?}", other.color()),
            })
        }
    };

    let mut grids: BTreeMap<u32, MaskGrid> = BTreeMap::new();
    for (i, &id) in ids.iter().enumerate() {
        if id == 0 {
            continue;
        }
        let grid = grids
            .entry(id)
            .or_insert_with(|| MaskGrid::empty(width, height));
        grid.set((i as u32) % width, (i as u32) / width, true);
    }
    grids
        .into_iter()
        .map(|(id, grid)| {
            let category = categories
                .get(&id)
                .cloned()
                .unwrap_or_else(|| format!("object_{id}"));
            InstanceMask::new(id, category, grid)
        })
        .collect()
}

/// Loads every frame's masks and groups them into per-object masklets,
/// sorted by object id.
pub fn load_masklets(manifest: &VideoManifest) -> Result<Vec<Masklet>, SceneError> {
    let mut by_id: BTreeMap<u32, Masklet> = BTreeMap::new();
    for (t, frame) in manifest.frames.iter().enumerate() {
        let masks = decode_masks(&manifest.resolve(&frame.mask_ref), &manifest.categories)?;
        for mask in masks {
            by_id
                .entry(mask.object_id)
                .or_insert_with(|| Masklet::new(mask.object_id, mask.category.clone()))
                .insert(t, mask);
        }
    }
    Ok(by_id.into_values().collect())
}

/// Writes an indexed 8-bit mask image (ids must fit in u8).
pub fn encode_mask_image(path: &Path, width: u32, height: u32, ids: &[u8]) -> Result<(), SceneError> {
    let img =
        image::ImageBuffer::<image::Luma<u8>, _>::from_raw(width, height, ids.to_vec()).unwrap();
    img.save(path).map_err(|e| SceneError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexed_mask_splits_per_object() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.png");
        // 4x1: background, object 1, object 2, object 2
        encode_mask_image(&p, 4, 1, &[0, 1, 2, 2]).unwrap();
        let mut cats = BTreeMap::new();
        cats.insert(1, "car".to_string());
        let masks = decode_masks(&p, &cats).unwrap();
        assert_eq!(masks.len(), 2);
        assert_eq!(masks[0].object_id, 1);
        assert_eq!(masks[0].category, "car");
        assert_eq!(masks[0].grid.count(), 1);
        assert_eq!(masks[1].object_id, 2);
        assert_eq!(masks[1].category, "object_2");
        assert_eq!(masks[1].grid.count(), 2);
    }

    #[test]
    fn background_only_mask_yields_no_objects() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.png");
        encode_mask_image(&p, 2, 2, &[0, 0, 0, 0]).unwrap();
        assert!(decode_masks(&p, &BTreeMap::new()).unwrap().is_empty());
    }
}
