//! Library side of the `flow` command: run specs, run directories, plots and
//! re-checks.

pub mod check;
pub mod output;
pub mod spec;
pub mod svg;

use mmdflow_core::Error;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

/// Process exit code for an error: bad input is a configuration error,
/// anything raised during a step is numerical.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Parse { .. }
        | Error::InvalidMeasure(_)
        | Error::Domain(_)
        | Error::AtomicTarget
        | Error::NotDiscreteTarget
        | Error::DimensionMismatch(..)
        | Error::Io(_) => EXIT_CONFIG,
        Error::NonFinite { .. }
        | Error::Quadrature { .. }
        | Error::Monotonicity { .. }
        | Error::DiscontinuityPoint(_)
        | Error::Bracket(_)
        | Error::AtStep { .. } => EXIT_NUMERICAL,
    }
}
