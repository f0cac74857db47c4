//! Command-line front end and persistence layer for the segmentation
//! rectification toolkit.
//!
//! The numerical model — the bilayer random field, its max-flow solver,
//! the weight trainers, the color-mixture classifier, and the synthetic
//! scene generator — lives in `rectseg-core`, which stays free of file and
//! OS concerns. This crate adds the things a batch workflow needs: image
//! and mask files, weight files with corruption detection, sequence
//! manifests, dense flow files, flat key-value configs, and the `rectseg`
//! binary wiring them together.

pub mod cli;
pub mod formats;
