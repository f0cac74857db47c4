//! Core algorithms for segmentation rectification.
//!
//! This crate learns asymmetric false-positive/false-negative penalty
//! weights for a bilayer Markov random field from example segmentations and
//! applies them by exact max-flow inference to rectify classifier output
//! during keyframe-to-sequence mask propagation.
//!
//! The crate is `no_std`-compatible (with `alloc`); the default `std`
//! feature enables `std::error::Error` integration and faster float paths.
//! File formats, image IO, and the command-line interface live in the
//! companion `rectseg` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod classifiers;
pub mod edges;
pub mod error;
pub mod evaluation;
pub mod grid;
pub mod inference;
pub mod learning;
pub mod model;
pub mod pipeline;
pub mod synthdata;
pub mod testkit;

pub use error::{CoreError, Result};
