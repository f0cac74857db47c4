//! Segmentation quality metrics and aggregation.
//!
//! * [`fpr_fnr`]: spurious-foreground and missing-foreground rates over
//!   the whole pixel grid (their sum is the overall pixel error).
//! * [`boundary_deviation`]: mean Euclidean distance from the predicted
//!   boundary to the reference boundary, one-directional, computed with an
//!   exact two-pass distance transform.
//! * [`accumulation_curve`]: per-offset mean and spread of a metric over
//!   many propagated sequences, for drift-over-time comparisons.
//! * [`uniform_baseline_weights`]: the flat weight vector used as the
//!   no-learning baseline.
//!
//! Boundaries are foreground pixels with at least one 4-neighbor
//! background pixel inside the grid; the image border alone does not make
//! a boundary.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[cfg_attr(feature = "std", allow(unused_imports))]
use num_traits::Float;

use crate::error::{CoreError, Result};
use crate::grid::Mask;
use crate::model::{Layout, WeightVector};

/// Per-frame metric record attached to propagation output.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMetrics {
    /// Spurious-foreground rate against ground truth.
    pub fpr: f64,
    /// Missing-foreground rate against ground truth.
    pub fnr: f64,
    /// Mean predicted-to-reference boundary distance; `None` when either
    /// mask is single-class.
    pub boundary_deviation: Option<f64>,
}

/// Spurious-foreground and missing-foreground rates.
///
/// Both are normalized by the total pixel count, so their sum equals the
/// fraction of wrongly labeled pixels.
pub fn fpr_fnr(pred: &Mask, gt: &Mask) -> Result<(f64, f64)> {
    pred.check_same_size_mask(gt)?;
    let total = pred.labels().len() as f64;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for (&p, &g) in pred.labels().iter().zip(gt.labels()) {
        match (p, g) {
            (1, 0) => fp += 1,
            (0, 1) => fn_ += 1,
            _ => {}
        }
    }
    Ok((fp as f64 / total, fn_ as f64 / total))
}

/// Fraction of wrongly labeled pixels (equals FPR + FNR).
pub fn pixel_error(pred: &Mask, gt: &Mask) -> Result<f64> {
    let (fpr, fnr) = fpr_fnr(pred, gt)?;
    Ok(fpr + fnr)
}

/// Foreground pixels with an in-grid 4-neighbor background pixel.
pub fn boundary_pixels(mask: &Mask) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for r in 0..mask.height() {
        for c in 0..mask.width() {
            if mask.label(r, c) != 1 {
                continue;
            }
            let neighbors = [
                (r as i64 - 1, c as i64),
                (r as i64 + 1, c as i64),
                (r as i64, c as i64 - 1),
                (r as i64, c as i64 + 1),
            ];
            if neighbors
                .iter()
                .any(|&(nr, nc)| mask.label_at(nr, nc) == Some(0))
            {
                out.push((r, c));
            }
        }
    }
    out
}

/// Exact Euclidean distance from every pixel to the nearest seed pixel
/// (`true` entries), row-major; all-infinite when no seed exists.
///
/// Two-pass separable algorithm over squared distances: an exact lower
/// envelope of parabolas per column, then per row.
pub fn distance_transform(width: usize, height: usize, seeds: &[bool]) -> Result<Vec<f64>> {
    if width == 0 || height == 0 {
        return Err(CoreError::EmptyGrid);
    }
    if seeds.len() != width * height {
        return Err(CoreError::DimensionMismatch {
            expected: (width, height),
            got: (seeds.len(), 1),
        });
    }
    let mut sq: Vec<f64> = seeds
        .iter()
        .map(|&s| if s { 0.0 } else { f64::INFINITY })
        .collect();

    let mut column = vec![0.0f64; height];
    for c in 0..width {
        for r in 0..height {
            column[r] = sq[r * width + c];
        }
        let d = squared_dt_1d(&column);
        for r in 0..height {
            sq[r * width + c] = d[r];
        }
    }
    let mut row = vec![0.0f64; width];
    for r in 0..height {
        row.copy_from_slice(&sq[r * width..(r + 1) * width]);
        let d = squared_dt_1d(&row);
        sq[r * width..(r + 1) * width].copy_from_slice(&d);
    }
    Ok(sq.into_iter().map(f64::sqrt).collect())
}

/// One-dimensional squared distance transform with additive offsets `f`
/// (lower envelope of the parabolas `(x - q)^2 + f[q]`); infinite offsets
/// contribute no parabola.
fn squared_dt_1d(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![f64::INFINITY; n];
    let mut hull: Vec<usize> = Vec::with_capacity(n);
    let mut left: Vec<f64> = Vec::with_capacity(n);
    for q in 0..n {
        if f[q].is_infinite() {
            continue;
        }
        let mut s = f64::NEG_INFINITY;
        while let Some(&p) = hull.last() {
            // Intersection of parabola q with the current hull top.
            s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / ((2 * (q - p)) as f64);
            if s <= *left.last().expect("hull and left stay in sync") {
                hull.pop();
                left.pop();
                s = f64::NEG_INFINITY;
            } else {
                break;
            }
        }
        hull.push(q);
        left.push(if hull.len() == 1 { f64::NEG_INFINITY } else { s });
    }
    if hull.is_empty() {
        return d;
    }
    let mut k = 0;
    for (q, dq) in d.iter_mut().enumerate() {
        while k + 1 < hull.len() && left[k + 1] < q as f64 {
            k += 1;
        }
        let p = hull[k];
        let diff = q as f64 - p as f64;
        *dq = f[p] + diff * diff;
    }
    d
}

/// Mean distance from the predicted boundary to the reference boundary
/// (one-directional).
pub fn boundary_deviation(pred: &Mask, gt: &Mask) -> Result<f64> {
    pred.check_same_size_mask(gt)?;
    let pred_boundary = boundary_pixels(pred);
    if pred_boundary.is_empty() {
        return Err(CoreError::UndefinedMetric("predicted boundary is empty"));
    }
    let gt_boundary = boundary_pixels(gt);
    if gt_boundary.is_empty() {
        return Err(CoreError::UndefinedMetric("reference boundary is empty"));
    }
    let (w, h) = (gt.width(), gt.height());
    let mut seeds = vec![false; w * h];
    for (r, c) in gt_boundary {
        seeds[r * w + c] = true;
    }
    let dist = distance_transform(w, h, &seeds)?;
    let sum: f64 = pred_boundary.iter().map(|&(r, c)| dist[r * w + c]).sum();
    Ok(sum / pred_boundary.len() as f64)
}

/// Mean of the two one-directional boundary deviations.
pub fn boundary_deviation_symmetric(pred: &Mask, gt: &Mask) -> Result<f64> {
    Ok(0.5 * (boundary_deviation(pred, gt)? + boundary_deviation(gt, pred)?))
}

/// One row of an accumulation table.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    /// Frame offset from the keyframe.
    pub offset: usize,
    /// Sequences still contributing at this offset.
    pub alive: usize,
    /// Mean metric value over those sequences.
    pub mean: f64,
    /// Population standard deviation over those sequences.
    pub std: f64,
}

/// Per-offset aggregation of a metric across sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumulationCurve {
    /// Rows ordered by offset, one per offset reached by any sequence.
    pub rows: Vec<CurveRow>,
}

impl AccumulationCurve {
    /// Tab-separated rendering with a header row.
    pub fn to_tsv(&self) -> String {
        use core::fmt::Write;
        let mut out = String::from("offset\talive\tmean\tstd\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{:.6}\t{:.6}",
                row.offset, row.alive, row.mean, row.std
            );
        }
        out
    }
}

/// Aggregates per-sequence metric series by frame offset.
///
/// Ragged series are fine: each offset averages over the sequences that
/// still have a value there.
pub fn accumulation_curve(series: &[Vec<f64>]) -> Result<AccumulationCurve> {
    if series.is_empty() || series.iter().all(|s| s.is_empty()) {
        return Err(CoreError::EmptyInput("metric series"));
    }
    let longest = series.iter().map(Vec::len).max().unwrap_or(0);
    let mut rows = Vec::with_capacity(longest);
    for offset in 0..longest {
        let values: Vec<f64> = series
            .iter()
            .filter_map(|s| s.get(offset).copied())
            .collect();
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        rows.push(CurveRow {
            offset,
            alive: values.len(),
            mean,
            std: var.sqrt(),
        });
    }
    Ok(AccumulationCurve { rows })
}

/// Flat weight vector used by the no-learning baseline: every entry
/// `1/11` (single edge channel) or `1/12` (dual).
pub fn uniform_baseline_weights(layout: Layout) -> WeightVector {
    WeightVector::uniform(layout)
}

/// Full per-frame record: error rates plus boundary deviation where the
/// latter is defined.
pub fn frame_metrics(pred: &Mask, gt: &Mask) -> Result<FrameMetrics> {
    let (fpr, fnr) = fpr_fnr(pred, gt)?;
    let boundary_deviation = match boundary_deviation(pred, gt) {
        Ok(v) => Some(v),
        Err(CoreError::UndefinedMetric(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(FrameMetrics {
        fpr,
        fnr,
        boundary_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::shape_distance;
    use crate::testkit;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn square_mask(canvas: usize, top: usize, left: usize, side: usize) -> Mask {
        let labels = (0..canvas * canvas)
            .map(|i| {
                let (r, c) = (i / canvas, i % canvas);
                u8::from((top..top + side).contains(&r) && (left..left + side).contains(&c))
            })
            .collect();
        Mask::from_labels(canvas, canvas, labels).unwrap()
    }

    #[test]
    fn identical_masks_have_zero_rates() {
        let m = square_mask(8, 2, 2, 4);
        assert_eq!(fpr_fnr(&m, &m).unwrap(), (0.0, 0.0));
        assert_eq!(boundary_deviation(&m, &m).unwrap(), 0.0);
    }

    #[test]
    fn five_spurious_pixels_on_a_hundred_give_five_percent_fpr() {
        let gt = square_mask(10, 3, 3, 4);
        let mut pred = gt.clone();
        for c in 0..5 {
            pred.set_label(0, c, 1);
        }
        let (fpr, fnr) = fpr_fnr(&pred, &gt).unwrap();
        assert_eq!(fpr, 0.05);
        assert_eq!(fnr, 0.0);
    }

    #[test]
    fn complement_of_a_half_mask_errs_on_every_pixel() {
        let labels = (0..64).map(|i| u8::from(i < 32)).collect();
        let gt = Mask::from_labels(8, 8, labels).unwrap();
        let (fpr, fnr) = fpr_fnr(&gt.complement(), &gt).unwrap();
        assert_eq!(fpr, 0.5);
        assert_eq!(fnr, 0.5);
    }

    #[test]
    fn rates_sum_to_the_pixel_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let a = testkit::random_mask(&mut rng, 9, 7);
            let b = testkit::random_mask(&mut rng, 9, 7);
            let (fpr, fnr) = fpr_fnr(&a, &b).unwrap();
            let wrong = a
                .labels()
                .iter()
                .zip(b.labels())
                .filter(|(x, y)| x != y)
                .count();
            let expect = wrong as f64 / 63.0;
            assert!((fpr + fnr - expect).abs() <= 1e-15);
            assert!((pixel_error(&a, &b).unwrap() - expect).abs() <= 1e-15);
        }
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let a = square_mask(8, 2, 2, 3);
        let b = square_mask(9, 2, 2, 3);
        assert!(fpr_fnr(&a, &b).is_err());
        assert!(boundary_deviation(&a, &b).is_err());
    }

    /// Brute-force nearest-boundary oracle.
    fn brute_deviation(pred: &Mask, gt: &Mask) -> f64 {
        let pb = boundary_pixels(pred);
        let gb = boundary_pixels(gt);
        let sum: f64 = pb
            .iter()
            .map(|&(r, c)| {
                gb.iter()
                    .map(|&(gr, gc)| {
                        let dr = r as f64 - gr as f64;
                        let dc = c as f64 - gc as f64;
                        (dr * dr + dc * dc).sqrt()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .sum();
        sum / pb.len() as f64
    }

    /// A purely horizontal shift leaves the top and bottom edges of the
    /// square sitting exactly on the reference boundary, so half the
    /// predicted boundary is at distance zero and the mean is 0.5.
    #[test]
    fn horizontal_one_pixel_shift_deviates_by_exactly_half() {
        let gt = square_mask(20, 5, 5, 10);
        let pred = square_mask(20, 5, 6, 10);
        let dev = boundary_deviation(&pred, &gt).unwrap();
        assert!((dev - 0.5).abs() <= 1e-12, "deviation {dev}");
        assert!((dev - brute_deviation(&pred, &gt)).abs() <= 1e-12);
    }

    /// A diagonal shift keeps almost every predicted-boundary pixel off
    /// the reference boundary, so the mean sits just under one pixel.
    #[test]
    fn diagonal_one_pixel_shift_deviates_by_just_under_one() {
        let gt = square_mask(20, 5, 5, 10);
        let pred = square_mask(20, 6, 6, 10);
        let dev = boundary_deviation(&pred, &gt).unwrap();
        assert!((0.9..=1.0).contains(&dev), "deviation {dev}");
        assert!((dev - brute_deviation(&pred, &gt)).abs() <= 1e-12);
    }

    #[test]
    fn concentric_squares_two_apart_deviate_by_about_two() {
        let gt = square_mask(24, 6, 6, 12);
        let pred = square_mask(24, 4, 4, 16);
        let dev = boundary_deviation(&pred, &gt).unwrap();
        assert!((dev - 2.0).abs() <= 0.1, "deviation {dev}");
        assert!((dev - brute_deviation(&pred, &gt)).abs() <= 1e-12);
    }

    #[test]
    fn transform_matches_the_brute_force_oracle_on_random_masks() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut checked = 0;
        while checked < 30 {
            let a = testkit::random_mask(&mut rng, 11, 8);
            let b = testkit::random_mask(&mut rng, 11, 8);
            if boundary_pixels(&a).is_empty() || boundary_pixels(&b).is_empty() {
                continue;
            }
            let dev = boundary_deviation(&a, &b).unwrap();
            assert!((dev - brute_deviation(&a, &b)).abs() <= 1e-12);
            checked += 1;
        }
    }

    #[test]
    fn deviation_is_translation_invariant() {
        let gt = square_mask(30, 4, 5, 8);
        let pred = square_mask(30, 6, 5, 9);
        let gt_shift = square_mask(30, 4 + 7, 5 + 9, 8);
        let pred_shift = square_mask(30, 6 + 7, 5 + 9, 9);
        let a = boundary_deviation(&pred, &gt).unwrap();
        let b = boundary_deviation(&pred_shift, &gt_shift).unwrap();
        assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn single_class_masks_make_the_metric_undefined() {
        let full = Mask::ones(6, 6).unwrap();
        let square = square_mask(6, 1, 1, 3);
        assert!(matches!(
            boundary_deviation(&full, &square),
            Err(CoreError::UndefinedMetric(_))
        ));
        assert!(matches!(
            boundary_deviation(&square, &full),
            Err(CoreError::UndefinedMetric(_))
        ));
    }

    #[test]
    fn symmetric_variant_averages_both_directions() {
        let gt = square_mask(20, 5, 5, 10);
        let pred = square_mask(20, 5, 6, 10);
        let sym = boundary_deviation_symmetric(&pred, &gt).unwrap();
        let fwd = boundary_deviation(&pred, &gt).unwrap();
        let bwd = boundary_deviation(&gt, &pred).unwrap();
        assert!((sym - 0.5 * (fwd + bwd)).abs() <= 1e-15);
    }

    #[test]
    fn perfect_sequences_give_an_all_zero_curve() {
        let curve = accumulation_curve(&[vec![0.0; 5], vec![0.0; 5]]).unwrap();
        assert_eq!(curve.rows.len(), 5);
        for row in &curve.rows {
            assert_eq!(row.mean, 0.0);
            assert_eq!(row.std, 0.0);
            assert_eq!(row.alive, 2);
        }
    }

    #[test]
    fn curve_means_follow_the_arithmetic() {
        let curve =
            accumulation_curve(&[vec![1.0, 2.0, 3.0], vec![3.0, 4.0, 5.0]]).unwrap();
        let means: Vec<f64> = curve.rows.iter().map(|r| r.mean).collect();
        assert_eq!(means, vec![2.0, 3.0, 4.0]);
        for row in &curve.rows {
            assert_eq!(row.std, 1.0);
        }
    }

    #[test]
    fn ragged_series_aggregate_over_alive_sequences() {
        let curve = accumulation_curve(&[vec![1.0, 2.0], vec![3.0]]).unwrap();
        assert_eq!(curve.rows.len(), 2);
        assert_eq!(curve.rows[0].alive, 2);
        assert_eq!(curve.rows[0].mean, 2.0);
        assert_eq!(curve.rows[1].alive, 1);
        assert_eq!(curve.rows[1].mean, 2.0);
        let tsv = curve.to_tsv();
        assert!(tsv.starts_with("offset\talive\tmean\tstd\n"));
        assert_eq!(tsv.lines().count(), 3);
    }

    #[test]
    fn baseline_weights_are_flat() {
        let rgb = uniform_baseline_weights(Layout::Rgb);
        for &e in rgb.entries() {
            assert!((e - 1.0 / 11.0).abs() <= 1e-15);
        }
        let rgbd = uniform_baseline_weights(Layout::Rgbd);
        for &e in rgbd.entries() {
            assert!((e - 1.0 / 12.0).abs() <= 1e-15);
        }
    }

    /// Under flat weights the shape distance counts label disagreements
    /// over a symmetric offset set, so swapping the two masks leaves it
    /// unchanged.
    #[test]
    fn flat_weights_make_the_shape_distance_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let w = uniform_baseline_weights(Layout::Rgb);
        for _ in 0..20 {
            let a = testkit::random_mask(&mut rng, 7, 6);
            let b = testkit::random_mask(&mut rng, 7, 6);
            let ab = shape_distance(&a, &b, &w).unwrap();
            let ba = shape_distance(&b, &a, &w).unwrap();
            assert!((ab - ba).abs() <= 1e-12, "{ab} vs {ba}");
        }
    }
}
