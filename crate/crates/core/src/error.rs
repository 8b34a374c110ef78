use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("level must be at least 1")]
    ZeroLevel,

    #[error("level {level} exceeds the supported maximum {max} (rule size capped at 2^24+1 nodes)")]
    LevelTooLarge { level: u32, max: u32 },

    #[error("node index {index} out of range 1..={size} for level {level}")]
    IndexOutOfRange { level: u32, index: usize, size: usize },

    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("construction needs {predicted} points, above the cap of {cap}")]
    PointCapExceeded { predicted: u128, cap: u128 },

    #[error("epsilon must lie in (0, 1], got {0}")]
    InvalidEpsilon(f64),

    #[error("bound requires k >= 1")]
    ZeroK,

    #[error("integrand expects dimension {expected}, rule has dimension {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("integrand returned {value} at point {point:?}")]
    NonFiniteValue { point: Vec<f64>, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),
}
