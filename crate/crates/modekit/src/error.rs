use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The signal (or residue) does not carry enough extrema to anchor
    /// both envelopes. For a decomposition driver this means the residue
    /// has been reached.
    #[error("too few extrema to build envelopes")]
    TooFewExtrema,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("signal too short: {len} samples (need at least {min})")]
    SignalTooShort { len: usize, min: usize },

    #[error("realization index {index} out of range (nr = {nr})")]
    IndexOutOfRange { index: u32, nr: u32 },

    #[error("sequence has zero variance over the correlation window")]
    ZeroVariance,

    #[error("decomposition has no modes")]
    EmptyDecomposition,

    #[error("frequency {frequency} Hz violates the Nyquist limit for fs = {sample_rate} Hz")]
    AliasingViolation { frequency: f64, sample_rate: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty input file")]
    EmptyFile,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
