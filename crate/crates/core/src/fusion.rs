//! Mask-guided visual input composition: raw frames, mask-overlaid frames,
//! and fused sequences pairing the two.

use image::RgbImage;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

use crate::scene::{decode_masks, InstanceMask, SceneError, VideoManifest};

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("mask is {mask_w}x{mask_h} but frame is {frame_w}x{frame_h}")]
    DimensionMismatch {
        mask_w: u32,
        mask_h: u32,
        frame_w: u32,
        frame_h: u32,
    },
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionKind {
    /// Frames unchanged.
    Raw,
    /// Every frame overlaid with its masks.
    MaskedOnly,
    /// Appearance and localization cues side by side; layout per
    /// [`FusionLayout`].
    Fusion,
}

/// How a fusion sequence combines raw and overlaid frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionLayout {
    /// Pairs (raw i, overlay i) interleaved in time, raw first.
    Interleave,
    /// One double-width frame per input frame: raw left, overlay right.
    SideBySide,
}

#[derive(Debug, Clone)]
pub struct FusionMode {
    pub kind: FusionKind,
    pub overlay_alpha: f64,
    pub layout: FusionLayout,
}

impl Default for FusionMode {
    fn default() -> Self {
        Self {
            kind: FusionKind::Fusion,
            overlay_alpha: 0.5,
            layout: FusionLayout::Interleave,
        }
    }
}

/// Fixed 20-color overlay palette, indexed by `object_id % 20`, so identical
/// id sets always get identical colors.
pub const PALETTE: [[u8; 3]; 20] = [
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [210, 245, 60],
    [250, 190, 212],
    [0, 128, 128],
    [220, 190, 255],
    [170, 110, 40],
    [255, 250, 200],
    [128, 0, 0],
    [170, 255, 195],
    [128, 128, 0],
    [255, 215, 180],
    [0, 0, 128],
    [128, 128, 128],
];

pub fn palette_color(object_id: u32) -> [u8; 3] {
    PALETTE[(object_id as usize) % PALETTE.len()]
}

/// Alpha-blends mask colors over a frame: inside a mask each channel becomes
/// `(1-alpha)*frame + alpha*color`, truncated to u8 (so alpha 0 and alpha 1
/// reproduce the inputs bit for bit); pixels outside every mask are
/// untouched. Overlapping masks resolve in ascending object id: the lowest
/// id claims the pixel.
pub fn overlay(
    frame: &RgbImage,
    masks: &[InstanceMask],
    alpha: f64,
    palette: impl Fn(u32) -> [u8; 3],
) -> Result<RgbImage, FusionError> {
    for m in masks {
        if m.grid.width != frame.width() || m.grid.height != frame.height() {
            return Err(FusionError::DimensionMismatch {
                mask_w: m.grid.width,
                mask_h: m.grid.height,
                frame_w: frame.width(),
                frame_h: frame.height(),
            });
        }
    }
    let mut sorted: Vec<&InstanceMask> = masks.iter().collect();
    sorted.sort_by_key(|m| m.object_id);

    let mut out = frame.clone();
    let mut claimed = vec![false; (frame.width() * frame.height()) as usize];
    for mask in sorted {
        let color = palette(mask.object_id);
        for (u, v) in mask.grid.iter_set() {
            let i = (v * frame.width() + u) as usize;
            if claimed[i] {
                continue;
            }
            claimed[i] = true;
            let px = out.get_pixel_mut(u, v);
            for c in 0..3 {
                let blended =
                    (1.0 - alpha) * f64::from(px.0[c]) + alpha * f64::from(color[c]);
                px.0[c] = blended as u8;
            }
        }
    }
    Ok(out)
}

/// One emitted frame of a composed sequence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceEntry {
    pub index: usize,
    /// `raw` or `overlay` (a side-by-side fusion frame counts as `overlay`).
    pub kind: String,
    pub source_frame: usize,
}

pub struct ComposedSequence {
    pub frames: Vec<RgbImage>,
    pub index: Vec<SequenceEntry>,
}

/// Composes the visual input sequence for a manifest under the given mode.
///
/// `raw` passes frames through; `masked_only` overlays every frame;
/// `fusion` interleaves (raw, overlay) pairs raw-first — or tiles them
/// side by side under [`FusionLayout::SideBySide`].
pub fn compose_sequence(
    manifest: &VideoManifest,
    mode: &FusionMode,
) -> Result<ComposedSequence, FusionError> {
    let mut frames = Vec::new();
    let mut index = Vec::new();
    for (t, entry) in manifest.frames.iter().enumerate() {
        let rgb = image::open(manifest.resolve(&entry.rgb_ref))
            .map_err(|e| {
                FusionError::Scene(SceneError::CorruptAsset {
                    path: manifest.resolve(&entry.rgb_ref),
                    detail: e.to_string(),
                })
            })?
            .to_rgb8();
        match mode.kind {
            FusionKind::Raw => {
                index.push(SequenceEntry {
                    index: frames.len(),
                    kind: "raw".into(),
                    source_frame: t,
                });
                frames.push(rgb);
            }
            FusionKind::MaskedOnly => {
                let masks =
                    decode_masks(&manifest.resolve(&entry.mask_ref), &manifest.categories)?;
                let over = overlay(&rgb, &masks, mode.overlay_alpha, palette_color)?;
                index.push(SequenceEntry {
                    index: frames.len(),
                    kind: "overlay".into(),
                    source_frame: t,
                });
                frames.push(over);
            }
            FusionKind::Fusion => {
                let masks =
                    decode_masks(&manifest.resolve(&entry.mask_ref), &manifest.categories)?;
                let over = overlay(&rgb, &masks, mode.overlay_alpha, palette_color)?;
                match mode.layout {
                    FusionLayout::Interleave => {
                        index.push(SequenceEntry {
                            index: frames.len(),
                            kind: "raw".into(),
                            source_frame: t,
                        });
                        frames.push(rgb);
                        index.push(SequenceEntry {
                            index: frames.len(),
                            kind: "overlay".into(),
                            source_frame: t,
                        });
                        frames.push(over);
                    }
                    FusionLayout::SideBySide => {
                        let mut tile = RgbImage::new(rgb.width() * 2, rgb.height());
                        for (x, y, p) in rgb.enumerate_pixels() {
                            tile.put_pixel(x, y, *p);
                        }
                        for (x, y, p) in over.enumerate_pixels() {
                            tile.put_pixel(x + rgb.width(), y, *p);
                        }
                        index.push(SequenceEntry {
                            index: frames.len(),
                            kind: "overlay".into(),
                            source_frame: t,
                        });
                        frames.push(tile);
                    }
                }
            }
        }
    }
    Ok(ComposedSequence { frames, index })
}

/// Writes numbered frames plus the tab-separated index file.
pub fn write_sequence(seq: &ComposedSequence, dir: &Path) -> Result<(), FusionError> {
    std::fs::create_dir_all(dir)?;
    let mut listing = String::from("index\tkind\tsource_frame\n");
    for (img, entry) in seq.frames.iter().zip(&seq.index) {
        let name = format!("{:06}.png", entry.index);
        img.save(dir.join(&name))
            .map_err(|e| FusionError::Io(std::io::Error::other(e)))?;
        listing.push_str(&format!(
            "{}\t{}\t{}\n",
            entry.index, entry.kind, entry.source_frame
        ));
    }
    std::fs::write(dir.join("index.tsv"), listing)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::MaskGrid;

    fn gray_frame(w: u32, h: u32, value: u8) -> RgbImage {
        RgbImage::from_pixel(w, h, image::Rgb([value, value, value]))
    }

    fn block(id: u32, u0: u32, v0: u32, side: u32, w: u32, h: u32) -> InstanceMask {
        let mut g = MaskGrid::empty(w, h);
        for v in v0..v0 + side {
            for u in u0..u0 + side {
                g.set(u, v, true);
            }
        }
        InstanceMask::new(id, "blob", g).unwrap()
    }

    #[test]
    fn alpha_zero_is_identity() {
        let frame = gray_frame(16, 16, 137);
        let out = overlay(&frame, &[block(1, 2, 2, 4, 16, 16)], 0.0, palette_color).unwrap();
        assert_eq!(out, frame);
    }

    #[test]
    fn alpha_one_paints_exact_palette_color() {
        let frame = gray_frame(16, 16, 137);
        let out = overlay(&frame, &[block(1, 2, 2, 4, 16, 16)], 1.0, palette_color).unwrap();
        assert_eq!(out.get_pixel(3, 3).0, palette_color(1));
        assert_eq!(out.get_pixel(10, 10).0, [137, 137, 137]);
    }

    #[test]
    fn half_blend_arithmetic() {
        // Pure red over gray 100 at alpha 0.5: (100+255)/2 truncates to 177,
        // (100+0)/2 = 50.
        let frame = gray_frame(8, 8, 100);
        let red = |_: u32| [255u8, 0, 0];
        let out = overlay(&frame, &[block(1, 0, 0, 2, 8, 8)], 0.5, red).unwrap();
        assert_eq!(out.get_pixel(0, 0).0, [177, 50, 50]);
    }

    #[test]
    fn overlap_resolves_to_lowest_id() {
        let frame = gray_frame(8, 8, 0);
        let masks = vec![block(2, 0, 0, 4, 8, 8), block(1, 2, 2, 4, 8, 8)];
        let out = overlay(&frame, &masks, 1.0, palette_color).unwrap();
        // (2,2) covered by both; id 1 wins.
        assert_eq!(out.get_pixel(2, 2).0, palette_color(1));
        assert_eq!(out.get_pixel(0, 0).0, palette_color(2));
        assert_eq!(out.get_pixel(5, 2).0, palette_color(1));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let frame = gray_frame(8, 8, 0);
        assert!(matches!(
            overlay(&frame, &[block(1, 0, 0, 2, 4, 4)], 0.5, palette_color),
            Err(FusionError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn background_pixels_bit_identical() {
        let mut frame = gray_frame(16, 16, 0);
        for (i, p) in frame.pixels_mut().enumerate() {
            p.0 = [(i % 251) as u8, (i % 13) as u8, (i % 97) as u8];
        }
        let mask = block(1, 4, 4, 6, 16, 16);
        let out = overlay(&frame, &[mask.clone()], 0.7, palette_color).unwrap();
        for v in 0..16 {
            for u in 0..16 {
                if !mask.grid.get(u, v) {
                    assert_eq!(out.get_pixel(u, v), frame.get_pixel(u, v));
                }
            }
        }
    }
}
