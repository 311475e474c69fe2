use thiserror::Error;

/// Errors raised by the waveform laboratory.
#[derive(Debug, Error)]
pub enum GfdmError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("roll-off factor {0} outside [0, 1]")]
    RolloffOutOfRange(f64),

    #[error("{what} index {index} out of range (must be < {bound})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length violation: {0}")]
    LengthViolation(String),

    #[error("cyclic prefix of {cp_length} samples is shorter than the {channel_len}-tap channel")]
    CyclicPrefixTooShort { cp_length: usize, channel_len: usize },

    #[error("matrix is singular: smallest singular value {smallest:e} vs largest {largest:e}")]
    SingularMatrix { smallest: f64, largest: f64 },

    #[error("block {index} is singular (singular-value ratio {ratio:e})")]
    SingularBlock { index: usize, ratio: f64 },

    #[error("channel frequency response has a null at bin {bin} (|Psi| = {magnitude:e})")]
    SpectralNull { bin: usize, magnitude: f64 },

    #[error("block size {block_size} does not divide dimension {dim}")]
    BlockSizeMismatch { block_size: usize, dim: usize },

    #[error("matrix is not block circulant (max deviation {max_deviation:e})")]
    NotBlockCirculant { max_deviation: f64 },

    #[error("matrix is not BCCB (max deviation {max_deviation:e})")]
    NotBccb { max_deviation: f64 },

    #[error("off-block energy ratio {ratio:e} exceeds tolerance")]
    OffBlockEnergy { ratio: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPositiveSemidefinite { eigenvalue: f64 },

    #[error("unsupported modulation order {0} (must be a square power of two, >= 4)")]
    UnsupportedModulation(usize),

    #[error("SVD precoding needs channel state at the transmitter")]
    MissingChannelState,

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GfdmError>;
