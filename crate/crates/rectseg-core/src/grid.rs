//! Pixel-grid containers: binary masks, probability maps, edge indicators,
//! RGB frames, and depth maps.
//!
//! All grids are row-major with `(row, col)` addressing. Dimensions are fixed
//! at construction; values are immutable through the public API except via
//! explicit setters used by generators and tests.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};

/// Generic row-major grid of per-pixel values.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    /// Creates a grid filled with `fill`. Errors on zero-sized grids.
    pub fn filled(width: usize, height: usize, fill: T) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(CoreError::EmptyGrid);
        }
        Ok(Grid {
            width,
            height,
            data: vec![fill; width * height],
        })
    }

    /// Wraps an existing row-major buffer. Errors if the length does not
    /// equal `width * height` or the grid is empty.
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(CoreError::EmptyGrid);
        }
        if data.len() != width * height {
            return Err(CoreError::DimensionMismatch {
                expected: (width, height),
                got: (data.len(), 1),
            });
        }
        Ok(Grid {
            width,
            height,
            data,
        })
    }
}

impl<T> Grid<T> {
    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Total pixel count.
    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.height && col < self.width);
        row * self.width + col
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.data[self.index(row, col)]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: T) {
        let i = self.index(row, col);
        self.data[i] = value;
    }

    /// True when `(row + dr, col + dc)` stays inside the grid.
    #[inline]
    pub fn in_bounds(&self, row: i64, col: i64) -> bool {
        row >= 0 && col >= 0 && (row as usize) < self.height && (col as usize) < self.width
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// True when `other` has identical width and height.
    #[inline]
    pub fn same_size<U>(&self, other: &Grid<U>) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn check_same_size<U>(&self, other: &Grid<U>) -> Result<()> {
        if self.same_size(other) {
            Ok(())
        } else {
            Err(CoreError::DimensionMismatch {
                expected: (self.width, self.height),
                got: (other.width, other.height),
            })
        }
    }
}

/// Binary label field over a pixel grid: 0 = background, 1 = foreground.
///
/// Holds both the unknown labeling `f` and binarized hypothesis labelings `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask(Grid<u8>);

impl Mask {
    /// All-background mask.
    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Ok(Mask(Grid::filled(width, height, 0)?))
    }

    /// All-foreground mask.
    pub fn ones(width: usize, height: usize) -> Result<Self> {
        Ok(Mask(Grid::filled(width, height, 1)?))
    }

    /// Wraps a row-major label buffer; every label must be 0 or 1.
    pub fn from_labels(width: usize, height: usize, labels: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&v| v > 1) {
            return Err(CoreError::InvalidValue {
                what: "mask label",
                value: bad as f64,
            });
        }
        Ok(Mask(Grid::from_vec(width, height, labels)?))
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.0.width()
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.0.height()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Label at `(row, col)` as 0 or 1.
    #[inline]
    pub fn label(&self, row: usize, col: usize) -> u8 {
        *self.0.get(row, col)
    }

    /// Label at a signed coordinate, or `None` outside the grid.
    #[inline]
    pub fn label_at(&self, row: i64, col: i64) -> Option<u8> {
        if self.0.in_bounds(row, col) {
            Some(self.label(row as usize, col as usize))
        } else {
            None
        }
    }

    #[inline]
    pub fn set_label(&mut self, row: usize, col: usize, value: u8) {
        debug_assert!(value <= 1);
        self.0.set(row, col, value);
    }

    #[inline]
    pub fn labels(&self) -> &[u8] {
        self.0.data()
    }

    #[inline]
    pub fn grid(&self) -> &Grid<u8> {
        &self.0
    }

    /// Number of foreground pixels.
    pub fn foreground_count(&self) -> usize {
        self.labels().iter().filter(|&&v| v == 1).count()
    }

    /// Per-pixel complement (0 <-> 1).
    pub fn complement(&self) -> Mask {
        let mut out = self.clone();
        for v in out.0.data_mut() {
            *v = 1 - *v;
        }
        out
    }

    pub(crate) fn check_same_size_mask(&self, other: &Mask) -> Result<()> {
        self.0.check_same_size(&other.0)
    }

    /// View as a probability map with values exactly 0.0 or 1.0.
    pub fn to_probability_map(&self) -> ProbabilityMap {
        let values = self.labels().iter().map(|&v| v as f64).collect();
        ProbabilityMap(Grid::from_vec(self.width(), self.height(), values).expect("same size"))
    }
}

/// Real-valued classifier output in `[0, 1]` per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap(Grid<f64>);

impl ProbabilityMap {
    /// Wraps a row-major value buffer; every value must lie in `[0, 1]`.
    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(CoreError::InvalidValue {
                what: "probability",
                value: bad,
            });
        }
        Ok(ProbabilityMap(Grid::from_vec(width, height, values)?))
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(CoreError::InvalidValue {
                what: "probability",
                value,
            });
        }
        Ok(ProbabilityMap(Grid::filled(width, height, value)?))
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.0.width()
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.0.height()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn value(&self, row: usize, col: usize) -> f64 {
        *self.0.get(row, col)
    }

    /// Value at a signed coordinate, or `None` outside the grid.
    #[inline]
    pub fn value_at(&self, row: i64, col: i64) -> Option<f64> {
        if self.0.in_bounds(row, col) {
            Some(self.value(row as usize, col as usize))
        } else {
            None
        }
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        self.0.data()
    }

    #[inline]
    pub fn grid(&self) -> &Grid<f64> {
        &self.0
    }
}

/// Per-pixel binary indicator of image-edge support.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeIndicator(Grid<bool>);

impl EdgeIndicator {
    pub fn none(width: usize, height: usize) -> Result<Self> {
        Ok(EdgeIndicator(Grid::filled(width, height, false)?))
    }

    pub fn all(width: usize, height: usize) -> Result<Self> {
        Ok(EdgeIndicator(Grid::filled(width, height, true)?))
    }

    pub fn from_flags(width: usize, height: usize, flags: Vec<bool>) -> Result<Self> {
        Ok(EdgeIndicator(Grid::from_vec(width, height, flags)?))
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.0.width()
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.0.height()
    }

    #[inline]
    pub fn on_edge(&self, row: usize, col: usize) -> bool {
        *self.0.get(row, col)
    }

    #[inline]
    pub fn set_edge(&mut self, row: usize, col: usize, on: bool) {
        self.0.set(row, col, on);
    }

    #[inline]
    pub fn flags(&self) -> &[bool] {
        self.0.data()
    }

    #[inline]
    pub fn grid(&self) -> &Grid<bool> {
        &self.0
    }

    /// Number of on-edge pixels.
    pub fn edge_count(&self) -> usize {
        self.flags().iter().filter(|&&b| b).count()
    }
}

/// RGB image with channel values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbFrame(Grid<[f64; 3]>);

impl RgbFrame {
    pub fn filled(width: usize, height: usize, color: [f64; 3]) -> Result<Self> {
        Ok(RgbFrame(Grid::filled(width, height, color)?))
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<[f64; 3]>) -> Result<Self> {
        Ok(RgbFrame(Grid::from_vec(width, height, pixels)?))
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.0.width()
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.0.height()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn pixel(&self, row: usize, col: usize) -> [f64; 3] {
        *self.0.get(row, col)
    }

    #[inline]
    pub fn set_pixel(&mut self, row: usize, col: usize, color: [f64; 3]) {
        self.0.set(row, col, color);
    }

    #[inline]
    pub fn pixels(&self) -> &[[f64; 3]] {
        self.0.data()
    }

    #[inline]
    pub fn grid(&self) -> &Grid<[f64; 3]> {
        &self.0
    }

    pub(crate) fn check_same_size_mask(&self, other: &Mask) -> Result<()> {
        self.0.check_same_size(&other.0)
    }

    /// Rec. 601 luminance plane, used by the RGB edge detector.
    pub fn luminance(&self) -> Grid<f64> {
        let data = self
            .pixels()
            .iter()
            .map(|p| 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2])
            .collect();
        Grid::from_vec(self.width(), self.height(), data).expect("same size")
    }
}

/// Single-channel depth image with values scaled to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap(Grid<f64>);

impl DepthMap {
    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        Ok(DepthMap(Grid::from_vec(width, height, values)?))
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.0.width()
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.0.height()
    }

    #[inline]
    pub fn value(&self, row: usize, col: usize) -> f64 {
        *self.0.get(row, col)
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        self.0.data()
    }

    #[inline]
    pub fn grid(&self) -> &Grid<f64> {
        &self.0
    }

    pub(crate) fn check_same_size_mask(&self, other: &Mask) -> Result<()> {
        self.0.check_same_size(&other.0)
    }
}

/// Dense per-pixel displacement field `(drow, dcol)` used to warp seed masks.
///
/// Displacements point from a target-frame pixel back to its source-frame
/// location (backward warping).
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField(Grid<[f32; 2]>);

impl FlowField {
    pub fn identity(width: usize, height: usize) -> Result<Self> {
        Ok(FlowField(Grid::filled(width, height, [0.0, 0.0])?))
    }

    pub fn from_vectors(width: usize, height: usize, vectors: Vec<[f32; 2]>) -> Result<Self> {
        Ok(FlowField(Grid::from_vec(width, height, vectors)?))
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.0.width()
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.0.height()
    }

    /// Displacement `(drow, dcol)` at `(row, col)`.
    #[inline]
    pub fn vector(&self, row: usize, col: usize) -> [f32; 2] {
        *self.0.get(row, col)
    }

    #[inline]
    pub fn vectors(&self) -> &[[f32; 2]] {
        self.0.data()
    }
}
