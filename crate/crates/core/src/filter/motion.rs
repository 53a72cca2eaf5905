//! Low-level motion and sharpness statistics.

use super::FilterError;

pub const BLOCK_SIZE: usize = 16;
pub const SEARCH_RADIUS: isize = 8;

/// Single-channel 8-bit frame.
#[derive(Debug, Clone)]
pub struct GrayFrame {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl GrayFrame {
    pub fn from_rgb(img: &image::RgbImage) -> Self {
        let data = img
            .pixels()
            .map(|p| {
                // BT.601 luma
                let [r, g, b] = p.0;
                (0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b)).round() as u8
            })
            .collect();
        Self {
            width: img.width(),
            height: img.height(),
            data,
        }
    }

    fn at(&self, x: usize, y: usize) -> f64 {
        f64::from(self.data[y * self.width as usize + x])
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct MotionFeatures {
    /// Mean over frames of the variance of the discrete Laplacian response.
    pub blur_degree: f64,
    pub fps: f64,
    /// Scene-change count: frame-difference energy above an adaptive
    /// threshold (stands in for container I-frame metadata, which frame
    /// sequences do not carry).
    pub iframe_count: usize,
    /// Mean block-motion magnitude, pixels/frame.
    pub mv_magnitude_mean: f64,
    /// Population variance of block-motion magnitude.
    pub mv_magnitude_var: f64,
}

impl MotionFeatures {
    pub fn as_vector(&self) -> [f64; 5] {
        [
            self.blur_degree,
            self.fps,
            self.iframe_count as f64,
            self.mv_magnitude_mean,
            self.mv_magnitude_var,
        ]
    }

    pub fn names() -> [&'static str; 5] {
        [
            "blur_degree",
            "fps",
            "iframe_count",
            "mv_magnitude_mean",
            "mv_magnitude_var",
        ]
    }
}

/// Extracts motion statistics from a grayscale frame sequence.
///
/// Motion vectors come from exhaustive block matching: 16x16 blocks,
/// +/-8 px search, sum of absolute differences. Only blocks whose full
/// search window lies inside the frame participate, so a pure pan yields
/// its exact displacement with zero variance. SAD ties break toward the
/// smallest displacement, keeping static content at zero motion.
pub fn motion_features(frames: &[GrayFrame], fps: f64) -> Result<MotionFeatures, FilterError> {
    if frames.len() < 2 {
        return Err(FilterError::TooFewFrames {
            frames: frames.len(),
        });
    }

    let blur_degree =
        frames.iter().map(laplacian_variance).sum::<f64>() / frames.len() as f64;

    let mut magnitudes = Vec::new();
    let mut diff_energies = Vec::with_capacity(frames.len() - 1);
    for pair in frames.windows(2) {
        let (reference, current) = (&pair[0], &pair[1]);
        magnitudes.extend(block_motion_magnitudes(reference, current));
        diff_energies.push(mean_abs_diff(reference, current));
    }

    let (mv_magnitude_mean, mv_magnitude_var) = mean_var(&magnitudes);
    let iframe_count = scene_change_count(&diff_energies);

    Ok(MotionFeatures {
        blur_degree,
        fps,
        iframe_count,
        mv_magnitude_mean,
        mv_magnitude_var,
    })
}

/// Variance of the 4-neighbor Laplacian over interior pixels. Constant
/// offsets cancel, so this is invariant to global intensity shifts.
fn laplacian_variance(frame: &GrayFrame) -> f64 {
    let (w, h) = (frame.width as usize, frame.height as usize);
    if w < 3 || h < 3 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let n = ((w - 2) * (h - 2)) as f64;
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let lap = frame.at(x, y - 1) + frame.at(x, y + 1) + frame.at(x - 1, y)
                + frame.at(x + 1, y)
                - 4.0 * frame.at(x, y);
            sum += lap;
            sum_sq += lap * lap;
        }
    }
    let mean = sum / n;
    (sum_sq / n - mean * mean).max(0.0)
}

fn block_motion_magnitudes(reference: &GrayFrame, current: &GrayFrame) -> Vec<f64> {
    let (w, h) = (current.width as usize, current.height as usize);
    let b = BLOCK_SIZE;
    let r = SEARCH_RADIUS as usize;
    let mut out = Vec::new();
    // Blocks on the BLOCK_SIZE grid whose full search window fits inside
    // the frame. BLOCK_SIZE >= SEARCH_RADIUS, so starting one block in
    // clears the left/top margins.
    let mut by = b;
    while by + b + r <= h {
        let mut bx = b;
        while bx + b + r <= w {
            out.push(best_match(reference, current, bx, by));
            bx += b;
        }
        by += b;
    }
    out
}

fn best_match(reference: &GrayFrame, current: &GrayFrame, bx: usize, by: usize) -> f64 {
    let w = current.width as usize;
    let mut best_sad = u64::MAX;
    let mut best_mag2 = i64::MAX;
    let mut best = (0isize, 0isize);
    for dy in -SEARCH_RADIUS..=SEARCH_RADIUS {
        for dx in -SEARCH_RADIUS..=SEARCH_RADIUS {
            let rx = (bx as isize + dx) as usize;
            let ry = (by as isize + dy) as usize;
            let mut sad = 0u64;
            for row in 0..BLOCK_SIZE {
                let cur_off = (by + row) * w + bx;
                let ref_off = (ry + row) * w + rx;
                for col in 0..BLOCK_SIZE {
                    let a = i64::from(current.data[cur_off + col]);
                    let b = i64::from(reference.data[ref_off + col]);
                    sad += a.abs_diff(b);
                }
                if sad > best_sad {
                    break;
                }
            }
            let mag2 = (dx * dx + dy * dy) as i64;
            if sad < best_sad || (sad == best_sad && mag2 < best_mag2) {
                best_sad = sad;
                best_mag2 = mag2;
                best = (dx, dy);
            }
        }
    }
    ((best.0 * best.0 + best.1 * best.1) as f64).sqrt()
}

fn mean_abs_diff(a: &GrayFrame, b: &GrayFrame) -> f64 {
    let n = a.data.len().min(b.data.len());
    if n == 0 {
        return 0.0;
    }
    let sum: u64 = a.data[..n]
        .iter()
        .zip(&b.data[..n])
        .map(|(x, y)| u64::from(x.abs_diff(*y)))
        .sum();
    sum as f64 / n as f64
}

/// Adaptive cut rule: energy above `max(12, 0.5 * median)` counts as a
/// scene change, so a hard-cut-every-frame clip counts all transitions
/// while sensor noise counts none.
fn scene_change_count(energies: &[f64]) -> usize {
    if energies.is_empty() {
        return 0;
    }
    let mut sorted = energies.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2];
    let threshold = (0.5 * median).max(12.0);
    energies.iter().filter(|e| **e > threshold).count()
}

fn mean_var(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}
