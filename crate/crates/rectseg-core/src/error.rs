//! Error type shared by all model, inference, and learning operations.

use core::fmt;

/// Errors surfaced by the rectification toolkit's core operations.
///
/// All variants describe invalid inputs or refused computations; numerical
/// routines that converge by construction do not produce errors.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// Two grids that must share dimensions do not.
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// A grid with zero pixels was supplied.
    EmptyGrid,
    /// An operation requiring at least one sample received none.
    EmptyInput(&'static str),
    /// A weight or feature vector had the wrong layout for the operation.
    LayoutMismatch {
        expected: &'static str,
        got: &'static str,
    },
    /// A numeric argument was outside its documented domain.
    InvalidValue {
        what: &'static str,
        value: f64,
    },
    /// A non-finite number reached a routine that requires finite input.
    NonFinite(&'static str),
    /// Exhaustive search refused an instance above its size cap.
    TooLarge {
        what: &'static str,
        limit: usize,
        got: usize,
    },
    /// A metric is undefined on the given input (e.g. no boundary exists).
    UndefinedMetric(&'static str),
    /// A class required by a classifier fit has no pixels.
    EmptyClass(&'static str),
    /// A per-frame asset required by the pipeline is missing.
    MissingAsset {
        frame: usize,
        asset: &'static str,
    },
    /// A scene description failed validation.
    InvalidScene(&'static str),
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::DimensionMismatch { expected, got } => write!(
                f,
                "dimension mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
            CoreError::EmptyGrid => write!(f, "grid has zero pixels"),
            CoreError::EmptyInput(what) => write!(f, "empty input: {what}"),
            CoreError::LayoutMismatch { expected, got } => {
                write!(f, "layout mismatch: expected {expected}, got {got}")
            }
            CoreError::InvalidValue { what, value } => {
                write!(f, "invalid value for {what}: {value}")
            }
            CoreError::NonFinite(what) => write!(f, "non-finite value in {what}"),
            CoreError::TooLarge { what, limit, got } => {
                write!(f, "{what} too large: {got} exceeds limit {limit}")
            }
            CoreError::UndefinedMetric(why) => write!(f, "metric undefined: {why}"),
            CoreError::EmptyClass(which) => write!(f, "empty class: {which}"),
            CoreError::MissingAsset { frame, asset } => {
                write!(f, "frame {frame}: missing {asset}")
            }
            CoreError::InvalidScene(why) => write!(f, "invalid scene: {why}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CoreError {}

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, CoreError>;
