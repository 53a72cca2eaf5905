//! Run-length mask serialization.
//!
//! Runs alternate background/foreground starting with background, over
//! row-major pixel order — so an all-background mask encodes as a single
//! count and the encoding is a bijection on grids of known size.

use serde::{Deserialize, Serialize};

use super::types::{InstanceMask, MaskGrid, Masklet};
use super::SceneError;

/// Encodes row-major booleans as alternating run counts, background first.
pub fn encode_rle(pixels: &[bool]) -> Vec<u32> {
    let mut counts = Vec::new();
    let mut current = false;
    let mut run: u32 = 0;
    for &p in pixels {
        if p == current {
            run += 1;
        } else {
            counts.push(run);
            current = p;
            run = 1;
        }
    }
    counts.push(run);
    // Trailing zero-length run only happens for the empty slice.
    if counts == [0] {
        counts.clear();
    }
    counts
}

/// Inverse of [`encode_rle`] for a known pixel count.
pub fn decode_rle(counts: &[u32], len: usize) -> Result<Vec<bool>, String> {
    let mut out = Vec::with_capacity(len);
    let mut value = false;
    for &c in counts {
        out.extend(std::iter::repeat(value).take(c as usize));
        value = !value;
    }
    if out.len() != len {
        return Err(format!("run counts sum to {}, expected {len}", out.len()));
    }
    Ok(out)
}

/// One frame's mask in run-length form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskRle {
    pub t: usize,
    pub width: u32,
    pub height: u32,
    pub counts: Vec<u32>,
}

impl MaskRle {
    pub fn from_grid(t: usize, grid: &MaskGrid) -> Self {
        Self {
            t,
            width: grid.width,
            height: grid.height,
            counts: encode_rle(grid.pixels()),
        }
    }

    pub fn to_grid(&self) -> Result<MaskGrid, String> {
        let len = (self.width as usize) * (self.height as usize);
        Ok(MaskGrid::new(
            self.width,
            self.height,
            decode_rle(&self.counts, len)?,
        ))
    }
}

/// A masklet in serializable run-length form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskletRle {
    pub object_id: u32,
    pub category: String,
    pub frames: Vec<MaskRle>,
}

pub fn masklet_to_rle(masklet: &Masklet) -> MaskletRle {
    MaskletRle {
        object_id: masklet.object_id,
        category: masklet.category.clone(),
        frames: masklet
            .frames
            .iter()
            .map(|(&t, mask)| MaskRle::from_grid(t, &mask.grid))
            .collect(),
    }
}

pub fn masklet_from_rle(rle: &MaskletRle) -> Result<Masklet, SceneError> {
    let mut masklet = Masklet::new(rle.object_id, rle.category.clone());
    let mut prev_t: Option<usize> = None;
    for frame in &rle.frames {
        if prev_t.is_some_and(|p| frame.t <= p) {
            return Err(SceneError::SchemaViolation {
                detail: format!(
                    "masklet {} frame indices not strictly increasing at t={}",
                    rle.object_id, frame.t
                ),
            });
        }
        prev_t = Some(frame.t);
        let grid = frame.to_grid().map_err(|detail| SceneError::SchemaViolation {
            detail: format!("masklet {} frame {}: {detail}", rle.object_id, frame.t),
        })?;
        masklet.insert(
            frame.t,
            InstanceMask::new(rle.object_id, rle.category.clone(), grid)?,
        );
    }
    Ok(masklet)
}
