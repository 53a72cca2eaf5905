//! Region similarity J, boundary accuracy F, and masklet-level J&F.

use super::MetricsError;
use crate::scene::{MaskGrid, Masklet};

fn check_dims(a: &MaskGrid, b: &MaskGrid) -> Result<(), MetricsError> {
    if a.width != b.width || a.height != b.height {
        return Err(MetricsError::DimensionMismatch {
            a_w: a.width,
            a_h: a.height,
            b_w: b.width,
            b_h: b.height,
        });
    }
    Ok(())
}

/// Intersection over union of the two pixel sets. Both empty scores 1
/// (nothing to find, nothing predicted); exactly one empty scores 0.
pub fn region_similarity_j(pred: &MaskGrid, gold: &MaskGrid) -> Result<f64, MetricsError> {
    check_dims(pred, gold)?;
    let mut inter = 0usize;
    let mut union = 0usize;
    for (p, g) in pred.pixels().iter().zip(gold.pixels()) {
        if *p && *g {
            inter += 1;
        }
        if *p || *g {
            union += 1;
        }
    }
    Ok(if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    })
}

/// 8-connected boundary: a mask pixel with any 8-neighbor outside the mask.
/// Pixels beyond the image border count as background, so a full mask has
/// its border ring as boundary.
fn boundary_pixels(mask: &MaskGrid) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for (u, v) in mask.iter_set() {
        let mut is_boundary = false;
        'scan: for dv in -1i64..=1 {
            for du in -1i64..=1 {
                if du == 0 && dv == 0 {
                    continue;
                }
                let nu = i64::from(u) + du;
                let nv = i64::from(v) + dv;
                let inside = nu >= 0
                    && nv >= 0
                    && nu < i64::from(mask.width)
                    && nv < i64::from(mask.height)
                    && mask.get(nu as u32, nv as u32);
                if !inside {
                    is_boundary = true;
                    break 'scan;
                }
            }
        }
        if is_boundary {
            out.push((u, v));
        }
    }
    out
}

/// Marks every pixel within Euclidean distance `tol` of a boundary pixel.
fn dilate(points: &[(u32, u32)], width: u32, height: u32, tol: f64) -> Vec<bool> {
    let mut hit = vec![false; (width as usize) * (height as usize)];
    let r = tol.floor() as i64;
    let tol2 = tol * tol;
    let mut offsets = Vec::new();
    for dv in -r..=r {
        for du in -r..=r {
            if (du * du + dv * dv) as f64 <= tol2 + 1e-9 {
                offsets.push((du, dv));
            }
        }
    }
    for &(u, v) in points {
        for &(du, dv) in &offsets {
            let nu = i64::from(u) + du;
            let nv = i64::from(v) + dv;
            if nu >= 0 && nv >= 0 && nu < i64::from(width) && nv < i64::from(height) {
                hit[(nv as usize) * (width as usize) + nu as usize] = true;
            }
        }
    }
    hit
}

/// Boundary F-measure at a pixel tolerance: precision and recall of the
/// 8-connected boundary sets under `dist <= tol`, combined by harmonic
/// mean. Both masks empty scores 1; exactly one empty scores 0.
pub fn boundary_accuracy_f(
    pred: &MaskGrid,
    gold: &MaskGrid,
    tolerance_px: f64,
) -> Result<f64, MetricsError> {
    check_dims(pred, gold)?;
    assert!(tolerance_px >= 0.0);
    if pred.is_empty() && gold.is_empty() {
        return Ok(1.0);
    }
    if pred.is_empty() != gold.is_empty() {
        return Ok(0.0);
    }
    let pred_b = boundary_pixels(pred);
    let gold_b = boundary_pixels(gold);

    let gold_hit = dilate(&gold_b, gold.width, gold.height, tolerance_px);
    let pred_hit = dilate(&pred_b, pred.width, pred.height, tolerance_px);
    let w = pred.width as usize;
    let precision = pred_b
        .iter()
        .filter(|(u, v)| gold_hit[(*v as usize) * w + *u as usize])
        .count() as f64
        / pred_b.len() as f64;
    let recall = gold_b
        .iter()
        .filter(|(u, v)| pred_hit[(*v as usize) * w + *u as usize])
        .count() as f64
        / gold_b.len() as f64;
    Ok(if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    })
}

/// The conventional boundary tolerance: 0.8% of the image diagonal, rounded
/// up, never below one pixel.
pub fn default_boundary_tolerance(width: u32, height: u32) -> f64 {
    let diag = (f64::from(width).powi(2) + f64::from(height).powi(2)).sqrt();
    (0.008 * diag).ceil().max(1.0)
}

/// J, F, and J&F for a predicted masklet against gold.
///
/// Scores are averaged over the frames where gold is present; a missing
/// prediction on such a frame scores as an empty mask. Frames where gold is
/// absent are excluded entirely.
pub fn jf_masklet_with_tolerance(
    pred: &Masklet,
    gold: &Masklet,
    tolerance_px: f64,
) -> Result<(f64, f64, f64), MetricsError> {
    if gold.frames.is_empty() {
        return Err(MetricsError::NoOverlappingFrames);
    }
    let mut j_sum = 0.0;
    let mut f_sum = 0.0;
    for (t, gold_mask) in &gold.frames {
        let empty;
        let pred_grid = match pred.frames.get(t) {
            Some(m) => &m.grid,
            None => {
                empty = MaskGrid::empty(gold_mask.grid.width, gold_mask.grid.height);
                &empty
            }
        };
        j_sum += region_similarity_j(pred_grid, &gold_mask.grid)?;
        f_sum += boundary_accuracy_f(pred_grid, &gold_mask.grid, tolerance_px)?;
    }
    let n = gold.frames.len() as f64;
    let j = j_sum / n;
    let f = f_sum / n;
    Ok((j, f, 0.5 * (j + f)))
}

/// [`jf_masklet_with_tolerance`] at the default tolerance for the gold
/// masklet's image size.
pub fn jf_masklet(pred: &Masklet, gold: &Masklet) -> Result<(f64, f64, f64), MetricsError> {
    let first = gold
        .frames
        .values()
        .next()
        .ok_or(MetricsError::NoOverlappingFrames)?;
    let tol = default_boundary_tolerance(first.grid.width, first.grid.height);
    jf_masklet_with_tolerance(pred, gold, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::InstanceMask;
    use proptest::prelude::*;

    fn grid(w: u32, h: u32, px: &[(u32, u32)]) -> MaskGrid {
        let mut g = MaskGrid::empty(w, h);
        for &(u, v) in px {
            g.set(u, v, true);
        }
        g
    }

    fn block(w: u32, h: u32, u0: u32, v0: u32, bw: u32, bh: u32) -> MaskGrid {
        let mut g = MaskGrid::empty(w, h);
        for v in v0..v0 + bh {
            for u in u0..u0 + bw {
                g.set(u, v, true);
            }
        }
        g
    }

    #[test]
    fn j_identical_disjoint_shifted() {
        let a = block(8, 8, 1, 1, 2, 2);
        assert_eq!(region_similarity_j(&a, &a).unwrap(), 1.0);

        let b = block(8, 8, 5, 5, 2, 2);
        assert_eq!(region_similarity_j(&a, &b).unwrap(), 0.0);

        // 2x2 block vs same block shifted one column: overlap 2, union 6.
        let c = block(8, 8, 2, 1, 2, 2);
        let j = region_similarity_j(&a, &c).unwrap();
        assert!((j - 2.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn j_empty_conventions() {
        let e = MaskGrid::empty(4, 4);
        let full = block(4, 4, 0, 0, 4, 4);
        assert_eq!(region_similarity_j(&e, &e).unwrap(), 1.0);
        assert_eq!(region_similarity_j(&e, &full).unwrap(), 0.0);
        assert_eq!(region_similarity_j(&full, &e).unwrap(), 0.0);
    }

    #[test]
    fn j_dimension_mismatch() {
        let a = MaskGrid::empty(4, 4);
        let b = MaskGrid::empty(5, 4);
        assert!(matches!(
            region_similarity_j(&a, &b),
            Err(MetricsError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn f_identical_is_one() {
        let a = block(16, 16, 3, 3, 5, 5);
        assert_eq!(boundary_accuracy_f(&a, &a, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn f_one_pixel_shift_tolerance() {
        // Two 1-px lines one row apart: every boundary pixel of one sits
        // exactly 1 px from the other's, so F is 0 at tolerance 0 and 1 at
        // tolerance 1.
        let a = block(16, 16, 2, 5, 9, 1);
        let b = block(16, 16, 2, 6, 9, 1);
        assert_eq!(boundary_accuracy_f(&a, &b, 0.0).unwrap(), 0.0);
        assert_eq!(boundary_accuracy_f(&a, &b, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn f_empty_cases() {
        let e = MaskGrid::empty(8, 8);
        let a = block(8, 8, 2, 2, 3, 3);
        assert_eq!(boundary_accuracy_f(&e, &e, 1.0).unwrap(), 1.0);
        assert_eq!(boundary_accuracy_f(&e, &a, 1.0).unwrap(), 0.0);
        assert_eq!(boundary_accuracy_f(&a, &e, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn interior_pixels_are_not_boundary() {
        let a = block(8, 8, 1, 1, 4, 4);
        let b = boundary_pixels(&a);
        assert!(!b.contains(&(2, 2)));
        assert!(b.contains(&(1, 1)));
        assert_eq!(b.len(), 12); // 4x4 block: 16 - 4 interior
    }

    #[test]
    fn full_mask_boundary_is_border_ring() {
        let full = block(6, 6, 0, 0, 6, 6);
        assert_eq!(boundary_pixels(&full).len(), 20);
        assert_eq!(boundary_accuracy_f(&full, &full, 0.0).unwrap(), 1.0);
    }

    fn masklet_of(grids: Vec<(usize, MaskGrid)>) -> Masklet {
        let mut m = Masklet::new(1, "x");
        for (t, g) in grids {
            if !g.is_empty() {
                m.insert(t, InstanceMask::new(1, "x", g).unwrap());
            }
        }
        m
    }

    #[test]
    fn jf_masklet_cases() {
        let a = block(16, 16, 3, 3, 5, 5);
        let gold = masklet_of(vec![(0, a.clone()), (1, a.clone())]);

        let perfect = jf_masklet(&gold, &gold).unwrap();
        assert_eq!(perfect, (1.0, 1.0, 1.0));

        let empty_pred = masklet_of(vec![]);
        let zero = jf_masklet(&empty_pred, &gold).unwrap();
        assert_eq!(zero, (0.0, 0.0, 0.0));
    }

    #[test]
    fn jf_mean_arithmetic() {
        // Per-frame J {1, 0.5}, F {1, 1} -> (0.75, 1.0, 0.875).
        // Frame 0: pred == gold. Frame 1: pred is the left half of gold
        // (J = 0.5) with every pred-boundary pixel within tolerance 2 of the
        // gold boundary and vice versa (F = 1).
        let gold0 = block(16, 16, 4, 4, 4, 4);
        let gold1 = block(16, 16, 4, 4, 4, 4);
        let pred1 = block(16, 16, 4, 4, 2, 4);
        let gold = masklet_of(vec![(0, gold0.clone()), (1, gold1.clone())]);
        let pred = masklet_of(vec![(0, gold0), (1, pred1.clone())]);
        let j1 = region_similarity_j(&pred1, &gold1).unwrap();
        assert!((j1 - 0.5).abs() < 1e-12);
        let f1 = boundary_accuracy_f(&pred1, &gold1, 2.0).unwrap();
        assert_eq!(f1, 1.0);
        let (j, f, jf) = jf_masklet_with_tolerance(&pred, &gold, 2.0).unwrap();
        assert!((j - 0.75).abs() < 1e-12);
        assert!((f - 1.0).abs() < 1e-12);
        assert!((jf - 0.875).abs() < 1e-12);
    }

    #[test]
    fn gold_absent_frames_excluded() {
        let a = block(16, 16, 3, 3, 5, 5);
        let gold = masklet_of(vec![(0, a.clone())]);
        // Prediction also fires on frame 1 where gold is absent: ignored.
        let pred = masklet_of(vec![(0, a.clone()), (1, a)]);
        assert_eq!(jf_masklet(&pred, &gold).unwrap(), (1.0, 1.0, 1.0));
    }

    #[test]
    fn empty_gold_masklet_is_an_error() {
        let a = block(16, 16, 3, 3, 5, 5);
        let pred = masklet_of(vec![(0, a)]);
        let gold = masklet_of(vec![]);
        assert!(matches!(
            jf_masklet(&pred, &gold),
            Err(MetricsError::NoOverlappingFrames)
        ));
    }

    #[test]
    fn default_tolerance_floor_and_scale() {
        assert_eq!(default_boundary_tolerance(32, 32), 1.0);
        assert_eq!(default_boundary_tolerance(640, 480), 7.0);
    }

    proptest! {
        /// J is symmetric and 1 on equal masks.
        #[test]
        fn j_symmetry(seed_a in any::<u64>(), seed_b in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut ra = rand_chacha::ChaCha8Rng::seed_from_u64(seed_a);
            let mut rb = rand_chacha::ChaCha8Rng::seed_from_u64(seed_b);
            let a = grid(12, 12, &(0..30).map(|_| (ra.random_range(0..12), ra.random_range(0..12))).collect::<Vec<_>>());
            let b = grid(12, 12, &(0..30).map(|_| (rb.random_range(0..12), rb.random_range(0..12))).collect::<Vec<_>>());
            prop_assert_eq!(region_similarity_j(&a, &b).unwrap(), region_similarity_j(&b, &a).unwrap());
            prop_assert_eq!(region_similarity_j(&a, &a).unwrap(), 1.0);
        }

        /// 1 - J is a metric: spot-check the triangle inequality.
        #[test]
        fn jaccard_distance_triangle(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut mk = |n: usize| {
                let px: Vec<(u32, u32)> = (0..n).map(|_| (rng.random_range(0..8), rng.random_range(0..8))).collect();
                grid(8, 8, &px)
            };
            let (a, b, c) = (mk(12), mk(12), mk(12));
            let dab = 1.0 - region_similarity_j(&a, &b).unwrap();
            let dbc = 1.0 - region_similarity_j(&b, &c).unwrap();
            let dac = 1.0 - region_similarity_j(&a, &c).unwrap();
            prop_assert!(dac <= dab + dbc + 1e-12);
        }
    }
}
