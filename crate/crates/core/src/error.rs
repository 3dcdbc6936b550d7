use thiserror::Error;

/// Errors raised by the numeric core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    DimensionMismatch {
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },

    #[error("invalid field shape {width}x{height} with {len} samples (need width, height >= 2 and len = width*height)")]
    InvalidShape { width: usize, height: usize, len: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("percentile {0} outside [0, 100]")]
    PercentileRange(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("blank frame: first interferogram has zero norm")]
    BlankFrame,

    #[error("degenerate pair: second frame is parallel to the first (step is a multiple of pi)")]
    DegeneratePair,

    #[error("mask starvation: only {kept} of {total} pixels usable for the step map")]
    MaskStarvation { kept: usize, total: usize },

    #[error("constant input cannot be normalized")]
    ConstantInput,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{}", match line { Some(l) => format!("line {l}: {message}"), None => message.clone() })]
    Parse { line: Option<usize>, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// True for failures caused by the data being numerically unusable
    /// rather than by a caller passing malformed arguments.
    pub fn is_degeneracy(&self) -> bool {
        matches!(
            self,
            Error::BlankFrame | Error::DegeneratePair | Error::MaskStarvation { .. } | Error::ConstantInput
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
