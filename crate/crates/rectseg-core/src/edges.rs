//! Image-gradient edge detection.
//!
//! Pair weights need a binary edge indicator; when the input bundle does
//! not ship one, it is derived here: central-difference gradients on the
//! luminance plane (or the raw depth plane), thresholded either at a
//! percentile of the nonzero gradient magnitudes or at an absolute value.
//! Percentile mode is the default so synthetic and natural imagery share
//! one configuration.

use alloc::vec::Vec;

#[cfg_attr(feature = "std", allow(unused_imports))]
use num_traits::Float;

use crate::error::{CoreError, Result};
use crate::grid::{DepthMap, EdgeIndicator, Grid, RgbFrame};

/// Default percentile of nonzero gradient magnitudes.
pub const DEFAULT_EDGE_PERCENTILE: f64 = 90.0;

/// Threshold rule applied to gradient magnitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMode {
    /// Keep magnitudes at or above this percentile of the nonzero
    /// magnitudes (range `(0, 100)`).
    Percentile(f64),
    /// Keep magnitudes at or above this value.
    Absolute(f64),
}

/// Edge-detector settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeConfig {
    /// How the magnitude cut is chosen.
    pub threshold: ThresholdMode,
}

impl Default for EdgeConfig {
    fn default() -> Self {
        Self {
            threshold: ThresholdMode::Percentile(DEFAULT_EDGE_PERCENTILE),
        }
    }
}

impl EdgeConfig {
    /// Rejects out-of-range threshold settings.
    pub fn validate(&self) -> Result<()> {
        match self.threshold {
            ThresholdMode::Percentile(p) => {
                if !(p.is_finite() && p > 0.0 && p < 100.0) {
                    return Err(CoreError::InvalidValue {
                        what: "edge percentile",
                        value: p,
                    });
                }
            }
            ThresholdMode::Absolute(a) => {
                if !(a.is_finite() && a >= 0.0) {
                    return Err(CoreError::InvalidValue {
                        what: "edge threshold",
                        value: a,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Detects edges on the luminance plane of a color frame.
pub fn detect_edges(frame: &RgbFrame, config: &EdgeConfig) -> Result<EdgeIndicator> {
    detect_edges_plane(&frame.luminance(), config)
}

/// Detects edges on the raw depth plane.
pub fn detect_edges_depth(depth: &DepthMap, config: &EdgeConfig) -> Result<EdgeIndicator> {
    detect_edges_plane(depth.grid(), config)
}

/// Shared single-plane detector.
pub fn detect_edges_plane(plane: &Grid<f64>, config: &EdgeConfig) -> Result<EdgeIndicator> {
    config.validate()?;
    let magnitudes = gradient_magnitudes(plane);
    let cut = match config.threshold {
        ThresholdMode::Absolute(a) => Some(a),
        ThresholdMode::Percentile(p) => percentile_of_nonzero(&magnitudes, p),
    };
    let flags = match cut {
        // No nonzero gradient anywhere: a constant plane has no edges.
        None => magnitudes.iter().map(|_| false).collect(),
        Some(cut) => magnitudes.iter().map(|&m| m >= cut).collect(),
    };
    EdgeIndicator::from_flags(plane.width(), plane.height(), flags)
}

/// Central-difference gradient magnitude per pixel, with coordinates
/// clamped at the borders.
fn gradient_magnitudes(plane: &Grid<f64>) -> Vec<f64> {
    let w = plane.width();
    let h = plane.height();
    let mut out = Vec::with_capacity(w * h);
    for r in 0..h {
        for c in 0..w {
            let left = *plane.get(r, c.saturating_sub(1));
            let right = *plane.get(r, (c + 1).min(w - 1));
            let up = *plane.get(r.saturating_sub(1), c);
            let down = *plane.get((r + 1).min(h - 1), c);
            let gx = 0.5 * (right - left);
            let gy = 0.5 * (down - up);
            out.push((gx * gx + gy * gy).sqrt());
        }
    }
    out
}

/// Nearest-rank percentile of the nonzero magnitudes; `None` when every
/// magnitude is zero.
fn percentile_of_nonzero(magnitudes: &[f64], percentile: f64) -> Option<f64> {
    let mut nonzero: Vec<f64> = magnitudes.iter().copied().filter(|&m| m > 0.0).collect();
    if nonzero.is_empty() {
        return None;
    }
    nonzero.sort_by(|a, b| a.partial_cmp(b).expect("finite magnitudes"));
    let n = nonzero.len();
    let mut rank = (percentile / 100.0 * n as f64).ceil() as usize;
    rank = rank.clamp(1, n);
    Some(nonzero[rank - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gray_frame(width: usize, height: usize, values: &[f64]) -> RgbFrame {
        let pixels = values.iter().map(|&v| [v, v, v]).collect();
        RgbFrame::from_pixels(width, height, pixels).unwrap()
    }

    #[test]
    fn constant_image_has_no_edges() {
        let frame = RgbFrame::filled(8, 6, [0.4, 0.4, 0.4]).unwrap();
        let edges = detect_edges(&frame, &EdgeConfig::default()).unwrap();
        assert_eq!(edges.edge_count(), 0);
    }

    #[test]
    fn vertical_step_yields_a_two_pixel_band() {
        let (w, h) = (8, 5);
        let values: Vec<f64> = (0..w * h)
            .map(|i| if i % w < 3 { 0.0 } else { 1.0 })
            .collect();
        let frame = gray_frame(w, h, &values);
        let edges = detect_edges(&frame, &EdgeConfig::default()).unwrap();
        for r in 0..h {
            for c in 0..w {
                let expected = c == 2 || c == 3;
                assert_eq!(
                    edges.on_edge(r, c),
                    expected,
                    "pixel ({r},{c}) expected {expected}"
                );
            }
        }
    }

    #[test]
    fn raising_the_percentile_never_adds_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let values: Vec<f64> = (0..10 * 9).map(|_| rng.gen::<f64>()).collect();
            let frame = gray_frame(10, 9, &values);
            let mut last = usize::MAX;
            for p in [10.0, 30.0, 50.0, 70.0, 90.0, 99.0] {
                let cfg = EdgeConfig {
                    threshold: ThresholdMode::Percentile(p),
                };
                let count = detect_edges(&frame, &cfg).unwrap().edge_count();
                assert!(count <= last, "percentile {p}: {count} > {last}");
                last = count;
            }
        }
    }

    #[test]
    fn absolute_mode_cuts_at_the_given_magnitude() {
        // Raw plane keeps the step magnitude an exact 0.5, pinning the
        // at-threshold >= convention.
        let (w, h) = (6, 4);
        let values: Vec<f64> = (0..w * h)
            .map(|i| if i % w < 3 { 0.0 } else { 1.0 })
            .collect();
        let plane = Grid::from_vec(w, h, values).unwrap();
        let strict = EdgeConfig {
            threshold: ThresholdMode::Absolute(0.6),
        };
        assert_eq!(detect_edges_plane(&plane, &strict).unwrap().edge_count(), 0);
        let loose = EdgeConfig {
            threshold: ThresholdMode::Absolute(0.5),
        };
        assert_eq!(
            detect_edges_plane(&plane, &loose).unwrap().edge_count(),
            2 * h
        );
    }

    #[test]
    fn depth_steps_are_detected_on_the_raw_plane() {
        let (w, h) = (7, 4);
        let values: Vec<f64> = (0..w * h)
            .map(|i| if (i / w) < 2 { 0.2 } else { 0.9 })
            .collect();
        let depth = DepthMap::from_values(w, h, values).unwrap();
        let edges = detect_edges_depth(&depth, &EdgeConfig::default()).unwrap();
        for r in 0..h {
            for c in 0..w {
                assert_eq!(edges.on_edge(r, c), r == 1 || r == 2, "({r},{c})");
            }
        }
    }

    #[test]
    fn out_of_range_percentile_is_rejected() {
        let cfg = EdgeConfig {
            threshold: ThresholdMode::Percentile(100.0),
        };
        assert!(cfg.validate().is_err());
        let cfg = EdgeConfig {
            threshold: ThresholdMode::Percentile(0.0),
        };
        assert!(cfg.validate().is_err());
    }
}
