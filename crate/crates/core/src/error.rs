use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A box with non-finite or inverted coordinates.
    InvalidBox { x1: f64, y1: f64, x2: f64, y2: f64 },
    ShapeMismatch {
        op: &'static str,
        expected: Vec<usize>,
        got: Vec<usize>,
    },
    /// Convolution or pooling geometry that yields an empty output.
    InvalidGeometry(String),
    LengthMismatch {
        op: &'static str,
        expected: usize,
        got: usize,
    },
    /// A dataset record violates referential integrity.
    Integrity(String),
    MissingFeatures { image_id: u64, detection: usize },
    Config(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidBox { x1, y1, x2, y2 } => {
                write!(f, "invalid box [{x1}, {y1}, {x2}, {y2}]")
            }
            Error::ShapeMismatch { op, expected, got } => {
                write!(f, "{op}: expected shape {expected:?}, got {got:?}")
            }
            Error::InvalidGeometry(msg) => write!(f, "invalid geometry: {msg}"),
            Error::LengthMismatch { op, expected, got } => {
                write!(f, "{op}: expected length {expected}, got {got}")
            }
            Error::Integrity(msg) => write!(f, "integrity violation: {msg}"),
            Error::MissingFeatures { image_id, detection } => write!(
                f,
                "image {image_id}: no feature vector for detection {detection}"
            ),
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
