//! Moving-object coverage: how much of the frame moves, and how spread out
//! the motion is.

use crate::scene::Masklet;

/// An object counts as moving above this mean pixel displacement per frame.
pub const MOVING_CENTROID_PX_PER_FRAME: f64 = 1.0;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CoverageFeatures {
    /// Mean fraction of pixels covered by moving objects, in [0, 1].
    pub moving_pixel_ratio: f64,
    /// Std of moving-object centroids normalized by the image diagonal,
    /// in [0, 1].
    pub spatial_dispersion: f64,
}

impl CoverageFeatures {
    pub fn as_vector(&self) -> [f64; 2] {
        [self.moving_pixel_ratio, self.spatial_dispersion]
    }

    pub fn names() -> [&'static str; 2] {
        ["moving_pixel_ratio", "spatial_dispersion"]
    }
}

fn centroid_px(mask: &crate::scene::InstanceMask) -> (f64, f64) {
    let mut su = 0.0;
    let mut sv = 0.0;
    let mut n = 0usize;
    for (u, v) in mask.grid.iter_set() {
        su += f64::from(u);
        sv += f64::from(v);
        n += 1;
    }
    (su / n as f64, sv / n as f64)
}

/// Estimates the proportion and spatial distribution of moving objects.
///
/// An object is moving when its mask centroid displaces by more than one
/// pixel per frame on average (gaps divide by elapsed frames).
pub fn dynamic_coverage(
    masklets: &[Masklet],
    frame_count: usize,
    width: u32,
    height: u32,
) -> CoverageFeatures {
    let total_px = f64::from(width) * f64::from(height);
    let diagonal = (f64::from(width).powi(2) + f64::from(height).powi(2)).sqrt();

    let mut moving_ids = Vec::new();
    let mut centroids: std::collections::BTreeMap<u32, Vec<(usize, (f64, f64))>> =
        std::collections::BTreeMap::new();
    for masklet in masklets {
        let series: Vec<(usize, (f64, f64))> = masklet
            .frames
            .iter()
            .map(|(&t, m)| (t, centroid_px(m)))
            .collect();
        let mut rates = Vec::new();
        for w in series.windows(2) {
            let dt = (w[1].0 - w[0].0) as f64;
            let du = w[1].1 .0 - w[0].1 .0;
            let dv = w[1].1 .1 - w[0].1 .1;
            rates.push((du * du + dv * dv).sqrt() / dt);
        }
        let mean_rate = if rates.is_empty() {
            0.0
        } else {
            rates.iter().sum::<f64>() / rates.len() as f64
        };
        if mean_rate > MOVING_CENTROID_PX_PER_FRAME {
            moving_ids.push(masklet.object_id);
        }
        centroids.insert(masklet.object_id, series);
    }

    if frame_count == 0 || moving_ids.is_empty() {
        return CoverageFeatures {
            moving_pixel_ratio: 0.0,
            spatial_dispersion: 0.0,
        };
    }

    let mut ratio_sum = 0.0;
    for t in 0..frame_count {
        let mut px = 0usize;
        for masklet in masklets {
            if moving_ids.contains(&masklet.object_id) {
                if let Some(m) = masklet.frames.get(&t) {
                    px += m.grid.count();
                }
            }
        }
        ratio_sum += px as f64 / total_px;
    }
    let moving_pixel_ratio = ratio_sum / frame_count as f64;

    let moving_centroids: Vec<(f64, f64)> = moving_ids
        .iter()
        .flat_map(|id| centroids[id].iter().map(|(_, c)| *c))
        .collect();
    let n = moving_centroids.len() as f64;
    let mu = moving_centroids
        .iter()
        .fold((0.0, 0.0), |acc, c| (acc.0 + c.0 / n, acc.1 + c.1 / n));
    let var = moving_centroids
        .iter()
        .map(|c| (c.0 - mu.0).powi(2) + (c.1 - mu.1).powi(2))
        .sum::<f64>()
        / n;
    let spatial_dispersion = (var.sqrt() / diagonal).clamp(0.0, 1.0);

    CoverageFeatures {
        moving_pixel_ratio,
        spatial_dispersion,
    }
}
