//! Weight/feature parameterization of the bilayer MRF energy.
//!
//! The energy of a labeling `f` given a hypothesis labeling `h` is a dot
//! product `w . psi(f, h)` between a nonnegative weight vector on the
//! probability simplex and a nonnegative feature vector:
//!
//! * one entry per edge channel: the boundary length of `f` weighted by
//!   image-edge support, and
//! * five "inside" entries counting pixels labeled foreground where the
//!   hypothesis (shifted by one of five cross-layer offsets) says background
//!   (missing-foreground patterns), and
//! * five "outside" entries counting pixels labeled background where the
//!   shifted hypothesis says foreground (spurious-foreground patterns).
//!
//! Separating the two blocks per offset is what lets training penalize false
//! positives and false negatives asymmetrically.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::grid::{EdgeIndicator, Mask, ProbabilityMap};

/// Raw pair weight when neither endpoint has image-edge support.
pub const RAW_NON_EDGE_WEIGHT: f64 = 20.0;

/// Exponent applied to the edge indicator in the raw pair weight
/// `exp(-5 * I_e)`.
pub const EDGE_ATTENUATION: f64 = 5.0;

/// The five cross-layer offsets `(drow, dcol)` connecting a labeling pixel to
/// its hypothesis-layer neighborhood: the co-located pixel plus its 4-neighbors.
///
/// The order is fixed so that weight and feature indices are deterministic:
/// co-located, up, down, left, right.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborhoodOffsets {
    offsets: [(i64, i64); 5],
}

impl NeighborhoodOffsets {
    /// The standard cross-layer neighborhood.
    pub const fn standard() -> Self {
        NeighborhoodOffsets {
            offsets: [(0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)],
        }
    }

    #[inline]
    pub fn offsets(&self) -> &[(i64, i64); 5] {
        &self.offsets
    }

    #[inline]
    pub fn get(&self, k: usize) -> (i64, i64) {
        self.offsets[k]
    }
}

impl Default for NeighborhoodOffsets {
    fn default() -> Self {
        Self::standard()
    }
}

/// Number of cross-layer offsets (and of inside/outside weights each).
pub const OFFSET_COUNT: usize = 5;

/// Weight-vector layout: single edge channel (RGB) or dual edge channels
/// (RGB plus depth).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// 11 entries: `[edge, inside x5, outside x5]`.
    Rgb,
    /// 12 entries: `[edge_rgb, edge_depth, inside x5, outside x5]`.
    Rgbd,
}

impl Layout {
    /// Total entry count (11 or 12).
    #[inline]
    pub fn len(self) -> usize {
        match self {
            Layout::Rgb => 11,
            Layout::Rgbd => 12,
        }
    }

    /// Number of leading edge-channel entries (1 or 2).
    #[inline]
    pub fn edge_channels(self) -> usize {
        match self {
            Layout::Rgb => 1,
            Layout::Rgbd => 2,
        }
    }

    /// Index of the inside entry for offset `k`.
    #[inline]
    pub fn inside_index(self, k: usize) -> usize {
        debug_assert!(k < OFFSET_COUNT);
        self.edge_channels() + k
    }

    /// Index of the outside entry for offset `k`.
    #[inline]
    pub fn outside_index(self, k: usize) -> usize {
        debug_assert!(k < OFFSET_COUNT);
        self.edge_channels() + OFFSET_COUNT + k
    }

    /// Human-readable tag used in files and error messages.
    pub fn tag(self) -> &'static str {
        match self {
            Layout::Rgb => "RGB",
            Layout::Rgbd => "RGBD",
        }
    }
}

/// Nonnegative weight vector on the probability simplex.
///
/// Entry order follows [`Layout`]: edge channel(s) first, then the five
/// inside (missing-foreground) weights, then the five outside
/// (spurious-foreground) weights, each indexed by cross-layer offset.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    layout: Layout,
    entries: Vec<f64>,
}

/// Simplex-sum tolerance for validated weight vectors.
pub const SIMPLEX_SUM_TOLERANCE: f64 = 1e-9;

impl WeightVector {
    /// Validates entry count, nonnegativity, and unit sum (within 1e-9).
    pub fn from_entries(layout: Layout, entries: Vec<f64>) -> Result<Self> {
        let w = Self::from_entries_unnormalized(layout, entries)?;
        let sum: f64 = w.entries.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_SUM_TOLERANCE {
            return Err(CoreError::InvalidValue {
                what: "weight sum (must be 1)",
                value: sum,
            });
        }
        Ok(w)
    }

    /// Validates entry count and nonnegativity but not the unit sum.
    ///
    /// Distances and energies are well defined for any nonnegative weights;
    /// this constructor admits externally supplied vectors (e.g. rounded
    /// published values) that miss the simplex by more than the strict
    /// tolerance. Trained vectors always satisfy [`Self::from_entries`].
    pub fn from_entries_unnormalized(layout: Layout, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != layout.len() {
            return Err(CoreError::LayoutMismatch {
                expected: layout.tag(),
                got: "wrong entry count",
            });
        }
        for &e in &entries {
            if !e.is_finite() {
                return Err(CoreError::NonFinite("weight entry"));
            }
            if e < 0.0 {
                return Err(CoreError::InvalidValue {
                    what: "weight entry (must be >= 0)",
                    value: e,
                });
            }
        }
        Ok(WeightVector { layout, entries })
    }

    /// Uniform vector `1/n` per entry.
    pub fn uniform(layout: Layout) -> Self {
        let n = layout.len();
        WeightVector {
            layout,
            entries: vec![1.0 / n as f64; n],
        }
    }

    #[inline]
    pub fn layout(&self) -> Layout {
        self.layout
    }

    #[inline]
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Edge weight of the single RGB channel (first entry).
    ///
    /// For the dual-channel layout this is the RGB edge weight.
    #[inline]
    pub fn edge_weight(&self) -> f64 {
        self.entries[0]
    }

    /// Depth-channel edge weight; `None` for the single-channel layout.
    #[inline]
    pub fn edge_weight_depth(&self) -> Option<f64> {
        match self.layout {
            Layout::Rgb => None,
            Layout::Rgbd => Some(self.entries[1]),
        }
    }

    /// Missing-foreground penalty weight for offset `k`.
    #[inline]
    pub fn inside(&self, k: usize) -> f64 {
        self.entries[self.layout.inside_index(k)]
    }

    /// Spurious-foreground penalty weight for offset `k`.
    #[inline]
    pub fn outside(&self, k: usize) -> f64 {
        self.entries[self.layout.outside_index(k)]
    }

    /// Sum of the five inside weights.
    pub fn inside_sum(&self) -> f64 {
        (0..OFFSET_COUNT).map(|k| self.inside(k)).sum()
    }

    /// Sum of the five outside weights.
    pub fn outside_sum(&self) -> f64 {
        (0..OFFSET_COUNT).map(|k| self.outside(k)).sum()
    }

    /// Dot product against a feature vector of the same layout.
    pub fn dot(&self, features: &FeatureVector) -> Result<f64> {
        if features.layout() != self.layout {
            return Err(CoreError::LayoutMismatch {
                expected: self.layout.tag(),
                got: features.layout().tag(),
            });
        }
        Ok(self
            .entries
            .iter()
            .zip(features.entries())
            .map(|(w, p)| w * p)
            .sum())
    }
}

/// Nonnegative potential statistics; same length and layout as the matching
/// [`WeightVector`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    layout: Layout,
    entries: Vec<f64>,
}

impl FeatureVector {
    /// Validates entry count, finiteness, and nonnegativity.
    pub fn from_entries(layout: Layout, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != layout.len() {
            return Err(CoreError::LayoutMismatch {
                expected: layout.tag(),
                got: "wrong entry count",
            });
        }
        for &e in &entries {
            if !e.is_finite() {
                return Err(CoreError::NonFinite("feature entry"));
            }
            if e < 0.0 {
                return Err(CoreError::InvalidValue {
                    what: "feature entry (must be >= 0)",
                    value: e,
                });
            }
        }
        Ok(FeatureVector { layout, entries })
    }

    #[inline]
    pub fn layout(&self) -> Layout {
        self.layout
    }

    #[inline]
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// First edge-channel entry (boundary length weighted by edge support).
    #[inline]
    pub fn edge_sum(&self) -> f64 {
        self.entries[0]
    }

    #[inline]
    pub fn inside(&self, k: usize) -> f64 {
        self.entries[self.layout.inside_index(k)]
    }

    #[inline]
    pub fn outside(&self, k: usize) -> f64 {
        self.entries[self.layout.outside_index(k)]
    }
}

/// Normalized boundary weights for every 4-neighbor pixel pair.
///
/// A pair touching an image edge gets a small weight (cutting there is cheap);
/// a pair with no edge support gets weight 1 after per-image normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeightField {
    width: usize,
    height: usize,
    /// Weight of pair ((r, c), (r, c+1)); length (width-1) * height.
    horizontal: Vec<f64>,
    /// Weight of pair ((r, c), (r+1, c)); length width * (height-1).
    vertical: Vec<f64>,
}

impl EdgeWeightField {
    /// Builds a field from explicit pair weights (primarily for tests).
    ///
    /// Weights must be finite and positive.
    pub fn from_pair_weights(
        width: usize,
        height: usize,
        horizontal: Vec<f64>,
        vertical: Vec<f64>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(CoreError::EmptyGrid);
        }
        if horizontal.len() != (width - 1) * height || vertical.len() != width * (height - 1) {
            return Err(CoreError::DimensionMismatch {
                expected: (width, height),
                got: (horizontal.len(), vertical.len()),
            });
        }
        for &w in horizontal.iter().chain(vertical.iter()) {
            if !w.is_finite() || w <= 0.0 {
                return Err(CoreError::InvalidValue {
                    what: "pair weight (must be finite and > 0)",
                    value: w,
                });
            }
        }
        Ok(EdgeWeightField {
            width,
            height,
            horizontal,
            vertical,
        })
    }

    /// Field with every pair weight equal to 1 (no edge support anywhere).
    pub fn uniform(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(CoreError::EmptyGrid);
        }
        Ok(EdgeWeightField {
            width,
            height,
            horizontal: vec![1.0; (width - 1) * height],
            vertical: vec![1.0; width * (height - 1)],
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Weight of the pair ((row, col), (row, col+1)).
    #[inline]
    pub fn horizontal(&self, row: usize, col: usize) -> f64 {
        debug_assert!(col + 1 < self.width);
        self.horizontal[row * (self.width - 1) + col]
    }

    /// Weight of the pair ((row, col), (row+1, col)).
    #[inline]
    pub fn vertical(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row + 1 < self.height);
        self.vertical[row * self.width + col]
    }

    /// Number of 4-neighbor pairs.
    pub fn pair_count(&self) -> usize {
        self.horizontal.len() + self.vertical.len()
    }

    /// Largest pair weight, or `None` when the grid has a single pixel.
    pub fn max_weight(&self) -> Option<f64> {
        self.horizontal
            .iter()
            .chain(self.vertical.iter())
            .cloned()
            .fold(None, |acc, w| Some(acc.map_or(w, |m: f64| m.max(w))))
    }

    /// Calls `visit(row_a, col_a, row_b, col_b, weight)` for every pair, in a
    /// fixed order (all horizontal pairs row-major, then all vertical pairs).
    pub fn for_each_pair<F: FnMut(usize, usize, usize, usize, f64)>(&self, mut visit: F) {
        for r in 0..self.height {
            for c in 0..self.width.saturating_sub(1) {
                visit(r, c, r, c + 1, self.horizontal(r, c));
            }
        }
        for r in 0..self.height.saturating_sub(1) {
            for c in 0..self.width {
                visit(r, c, r + 1, c, self.vertical(r, c));
            }
        }
    }

    pub(crate) fn check_same_size_mask(&self, mask: &Mask) -> Result<()> {
        if self.width == mask.width() && self.height == mask.height() {
            Ok(())
        } else {
            Err(CoreError::DimensionMismatch {
                expected: (self.width, self.height),
                got: (mask.width(), mask.height()),
            })
        }
    }
}

/// Computes normalized boundary-pair weights from an edge indicator.
///
/// Raw weight per 4-neighbor pair: `exp(-5)` when either endpoint is on an
/// image edge, else 20. The raw weights are then divided by the image's
/// maximum raw pair weight, so the largest weight is exactly 1. On an image
/// whose pairs all touch edges, every normalized weight is therefore 1.
pub fn build_edge_weights(edges: &EdgeIndicator) -> Result<EdgeWeightField> {
    let (w, h) = (edges.width(), edges.height());
    let raw_edge = (-EDGE_ATTENUATION).exp();
    let pair_raw = |ra: usize, ca: usize, rb: usize, cb: usize| -> f64 {
        if edges.on_edge(ra, ca) || edges.on_edge(rb, cb) {
            raw_edge
        } else {
            RAW_NON_EDGE_WEIGHT
        }
    };

    let mut horizontal = Vec::with_capacity((w - 1) * h);
    for r in 0..h {
        for c in 0..w - 1 {
            horizontal.push(pair_raw(r, c, r, c + 1));
        }
    }
    let mut vertical = Vec::with_capacity(w * (h - 1));
    for r in 0..h.saturating_sub(1) {
        for c in 0..w {
            vertical.push(pair_raw(r, c, r + 1, c));
        }
    }

    let max = horizontal
        .iter()
        .chain(vertical.iter())
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    if max.is_finite() && max > 0.0 {
        for v in horizontal.iter_mut().chain(vertical.iter_mut()) {
            *v /= max;
        }
    }

    EdgeWeightField::from_pair_weights(w, h, horizontal, vertical)
        .or_else(|e| {
            // A single-pixel image has no pairs; represent it with empty
            // weight lists rather than failing.
            if w == 1 && h == 1 {
                Ok(EdgeWeightField {
                    width: 1,
                    height: 1,
                    horizontal: Vec::new(),
                    vertical: Vec::new(),
                })
            } else {
                Err(e)
            }
        })
}

/// Weighted count of label disagreements between `f` and the cross-layer
/// neighborhood of `h`.
///
/// For every labeling pixel `p` and offset `q` with `p + q` in the grid, adds
/// `outside_q * (1 - f_p) * h(p+q)` (spurious foreground) and
/// `inside_q * f_p * (1 - h(p+q))` (missing foreground). Offsets leaving the
/// grid contribute nothing.
pub fn shape_distance(f: &Mask, h: &Mask, w: &WeightVector) -> Result<f64> {
    f.check_same_size_mask(h)?;
    shape_distance_soft(f, &h.to_probability_map(), w)
}

/// [`shape_distance`] with a soft hypothesis: `h(p+q)` is used as a real
/// value in `[0, 1]` instead of a binary label.
pub fn shape_distance_soft(f: &Mask, h: &ProbabilityMap, w: &WeightVector) -> Result<f64> {
    if f.width() != h.width() || f.height() != h.height() {
        return Err(CoreError::DimensionMismatch {
            expected: (f.width(), f.height()),
            got: (h.width(), h.height()),
        });
    }
    let offsets = NeighborhoodOffsets::standard();
    let mut total = 0.0;
    for r in 0..f.height() {
        for c in 0..f.width() {
            let fp = f.label(r, c) as f64;
            for (k, &(dr, dc)) in offsets.offsets().iter().enumerate() {
                if let Some(hq) = h.value_at(r as i64 + dr, c as i64 + dc) {
                    total += w.outside(k) * (1.0 - fp) * hq + w.inside(k) * fp * (1.0 - hq);
                }
            }
        }
    }
    Ok(total)
}

/// Computes the 11-entry potential statistics of `(f, h)` for the
/// single-edge-channel layout.
///
/// Entry 0 sums `pair_weight * |f_p - f_p'|` over 4-neighbor pairs; entries
/// 1-5 count missing-foreground patterns `(1 - h(p+q)) * f_p` per offset;
/// entries 6-10 count spurious-foreground patterns `h(p+q) * (1 - f_p)`.
/// For any weight vector `w`, `w . psi` equals
/// `shape_distance(f, h, w) + edge_weight * entry0`.
pub fn compute_features(
    f: &Mask,
    h: &Mask,
    edge_weights: &EdgeWeightField,
) -> Result<FeatureVector> {
    f.check_same_size_mask(h)?;
    edge_weights.check_same_size_mask(f)?;
    let mut entries = vec![0.0; Layout::Rgb.len()];
    entries[0] = boundary_edge_sum(f, edge_weights);
    accumulate_cross_layer_counts(f, h, Layout::Rgb, &mut entries);
    FeatureVector::from_entries(Layout::Rgb, entries)
}

/// Computes the 12-entry potential statistics for the dual-edge-channel
/// layout: entries 0-1 are the RGB and depth boundary sums, entries 2-11
/// match [`compute_features`] entries 1-10.
pub fn compute_features_rgbd(
    f: &Mask,
    h: &Mask,
    rgb_edges: &EdgeWeightField,
    depth_edges: &EdgeWeightField,
) -> Result<FeatureVector> {
    f.check_same_size_mask(h)?;
    rgb_edges.check_same_size_mask(f)?;
    depth_edges.check_same_size_mask(f)?;
    let mut entries = vec![0.0; Layout::Rgbd.len()];
    entries[0] = boundary_edge_sum(f, rgb_edges);
    entries[1] = boundary_edge_sum(f, depth_edges);
    accumulate_cross_layer_counts(f, h, Layout::Rgbd, &mut entries);
    FeatureVector::from_entries(Layout::Rgbd, entries)
}

/// Sum of pair weights across the label boundary of `f`.
fn boundary_edge_sum(f: &Mask, edge_weights: &EdgeWeightField) -> f64 {
    let mut sum = 0.0;
    edge_weights.for_each_pair(|ra, ca, rb, cb, w| {
        if f.label(ra, ca) != f.label(rb, cb) {
            sum += w;
        }
    });
    sum
}

/// Adds the ten cross-layer disagreement counts into `entries` at the
/// layout's inside/outside indices.
fn accumulate_cross_layer_counts(f: &Mask, h: &Mask, layout: Layout, entries: &mut [f64]) {
    let offsets = NeighborhoodOffsets::standard();
    for r in 0..f.height() {
        for c in 0..f.width() {
            let fp = f.label(r, c);
            for (k, &(dr, dc)) in offsets.offsets().iter().enumerate() {
                if let Some(hq) = h.label_at(r as i64 + dr, c as i64 + dc) {
                    if fp == 1 && hq == 0 {
                        entries[layout.inside_index(k)] += 1.0;
                    } else if fp == 0 && hq == 1 {
                        entries[layout.outside_index(k)] += 1.0;
                    }
                }
            }
        }
    }
}
