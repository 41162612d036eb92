use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid size mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("grid value at index {index} is not finite")]
    NonFinite { index: usize },

    #[error("quadrature did not converge on [{lo}, {hi}] after maximum refinement")]
    Quadrature { lo: f64, hi: f64 },

    #[error("target measure has atoms; the explicit gradient is unavailable")]
    AtomicTarget,

    #[error("explicit step left the cone: {violations} monotonicity violations")]
    Monotonicity { violations: usize },

    #[error("target measure is not discrete")]
    NotDiscreteTarget,

    #[error("s = {0} is a jump point of the target quantile function")]
    DiscontinuityPoint(f64),

    #[error("bisection bracket failure for y = {0}")]
    Bracket(f64),

    #[error("invalid solver configuration: {0}")]
    Config(String),

    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("step {step}: {source}")]
    AtStep { step: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }

    /// The innermost error, with step annotations removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            e => e,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
