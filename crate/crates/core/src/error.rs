use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dimension must be positive")]
    EmptyDimension,

    #[error("{taps} taps do not fit in a block of length {n}")]
    TooManyTaps { taps: usize, n: usize },

    #[error("dense size {n} exceeds the limit of {limit}")]
    DenseTooLarge { n: usize, limit: usize },

    #[error("root index {u} is not coprime with length {n}")]
    InvalidRoot { u: u64, n: usize },

    #[error("cyclic prefix of {cp_length} samples exceeds block length {n}")]
    CpTooLong { cp_length: usize, n: usize },

    #[error("negative eigenvalue {value:e} at index {index}")]
    NegativeEigenvalue { index: usize, value: f64 },

    #[error("water-filling has no solution: every gain is zero")]
    NoWaterLevel,

    #[error("channel has zero energy")]
    ZeroEnergyChannel,

    #[error("reduction factor {l} does not divide block length {n}")]
    ReductionDoesNotDivide { l: usize, n: usize },

    #[error("no channels given")]
    NoChannels,

    #[error("invalid {name}: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
}
