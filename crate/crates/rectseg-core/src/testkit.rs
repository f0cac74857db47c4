//! Seeded random-instance builders shared by unit tests, property tests,
//! oracle comparisons, and the equivalence harness.
//!
//! Everything here is deterministic given the supplied RNG, so callers own
//! reproducibility by seeding.

use alloc::vec::Vec;

#[cfg_attr(feature = "std", allow(unused_imports))]
use num_traits::Float;
use rand::Rng;

use crate::grid::{EdgeIndicator, Mask};
use crate::model::{EdgeWeightField, FeatureVector, Layout, WeightVector};

/// Random binary mask with independent fair labels.
pub fn random_mask<R: Rng>(rng: &mut R, width: usize, height: usize) -> Mask {
    let labels = (0..width * height)
        .map(|_| if rng.gen::<bool>() { 1u8 } else { 0u8 })
        .collect();
    Mask::from_labels(width, height, labels).expect("valid random mask")
}

/// Random edge indicator where each pixel is on-edge with probability
/// `edge_prob`.
pub fn random_edge_indicator<R: Rng>(
    rng: &mut R,
    width: usize,
    height: usize,
    edge_prob: f64,
) -> EdgeIndicator {
    let flags = (0..width * height)
        .map(|_| rng.gen::<f64>() < edge_prob)
        .collect();
    EdgeIndicator::from_flags(width, height, flags).expect("valid indicator")
}

/// Edge-weight field with independent pair weights drawn from `(0.05, 1]`.
///
/// Unlike fields produced from an edge indicator, the maximum is not pinned
/// to 1; use this to exercise code paths on generic positive weights.
pub fn random_edge_weight_field<R: Rng>(
    rng: &mut R,
    width: usize,
    height: usize,
) -> EdgeWeightField {
    let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.gen_range(0.05..=1.0)).collect() };
    let horizontal = draw((width - 1) * height);
    let vertical = draw(width * (height - 1));
    EdgeWeightField::from_pair_weights(width, height, horizontal, vertical).expect("valid field")
}

/// Random weight vector drawn uniformly-ish on the simplex (normalized
/// exponentials of uniform draws).
pub fn random_simplex_weights<R: Rng>(rng: &mut R, layout: Layout) -> WeightVector {
    let n = layout.len();
    let mut entries: Vec<f64> = (0..n).map(|_| -(rng.gen::<f64>().ln())).collect();
    let sum: f64 = entries.iter().sum();
    for e in entries.iter_mut() {
        *e /= sum;
    }
    WeightVector::from_entries(layout, entries).expect("normalized")
}

/// Random nonnegative feature vector with entries in `[0, scale]`.
pub fn random_features<R: Rng>(rng: &mut R, layout: Layout, scale: f64) -> FeatureVector {
    let entries = (0..layout.len())
        .map(|_| rng.gen_range(0.0..=scale))
        .collect();
    FeatureVector::from_entries(layout, entries).expect("nonnegative")
}
