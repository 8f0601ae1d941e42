use alloc::string::String;

/// Errors produced by the interpolation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDimension(String),
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize, usize),
        actual: (usize, usize, usize),
    },
    #[error("image too small: {height}x{width}, need at least {min}x{min}")]
    TooSmall {
        height: usize,
        width: usize,
        min: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid timestamp {num}/{den}")]
    InvalidTimeStamp { num: u32, den: u32 },
    #[error("invalid frame count {0}: must be odd and positive")]
    InvalidCount(usize),
    #[error("sequence length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("refiner contract violated: {0}")]
    Contract(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("scene violates the clipping constraint: {0}")]
    Clipping(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
