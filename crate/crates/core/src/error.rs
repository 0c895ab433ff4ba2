use alloc::boxed::Box;
use core::fmt;

use crate::fit::FitResult;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the simulation and fitting routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a precondition (non-positive linewidth, negative
    /// intensity, non-unit direction, ...).
    Domain(&'static str),
    /// The least-squares normal matrix is singular or the model cannot be
    /// distinguished from a degenerate one on the given data.
    DegenerateFit(&'static str),
    /// The fit did not converge within the iteration budget; carries the
    /// best parameters found so far.
    NonConvergence(Box<FitResult>),
    /// Not enough data points for the requested operation.
    InsufficientData(&'static str),
    /// The pumping integrator time step would move a population by more
    /// than 10% in one step.
    TimestepTooCoarse { max_step_fraction: f64 },
    /// A fluorescence series has no decaying portion to fit.
    NonDecaying,
    /// An internal root finder failed to converge.
    RootFind(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::DegenerateFit(msg) => write!(f, "degenerate fit: {msg}"),
            Error::NonConvergence(best) => write!(
                f,
                "fit did not converge in {} iterations (best rss {:.3e})",
                best.iterations, best.rss
            ),
            Error::InsufficientData(msg) => write!(f, "insufficient data: {msg}"),
            Error::TimestepTooCoarse { max_step_fraction } => write!(
                f,
                "time step too coarse: population step {:.1}% per step exceeds 10%",
                max_step_fraction * 100.0
            ),
            Error::NonDecaying => write!(f, "series has no decaying portion"),
            Error::RootFind(msg) => write!(f, "root finder failed: {msg}"),
        }
    }
}

#[cfg(any(test, feature = "std"))]
impl std::error::Error for Error {}
