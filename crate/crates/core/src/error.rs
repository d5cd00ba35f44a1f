use alloc::boxed::Box;
use core::fmt;

use crate::estimate::FitResult;

/// Errors produced across the library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter or argument is outside its admissible range. The payload
    /// names the offending parameter.
    Domain(&'static str),
    /// A conditional probability was requested on an event of probability
    /// zero.
    UndefinedConditional,
    /// The series is constant, so the lag-1 autocorrelation is undefined.
    ConstantSeries,
    /// Too few observations for the requested operation.
    SeriesTooShort { needed: usize, got: usize },
    /// A fixed-point or power iteration did not converge within its
    /// iteration budget.
    NoConvergence,
    /// Every optimizer start failed to meet the gradient tolerance; the best
    /// point found is attached so callers can still report it.
    FitDidNotConverge(Box<FitResult>),
    /// The observed information matrix is singular; standard errors are not
    /// reported rather than fabricated.
    SingularInformation,
    /// The score is evaluated at a mixture boundary (phi in {0, 1}) where
    /// the analytic formulas divide by a vanishing mixture term.
    PhiBoundary,
    /// The moment system has no solution in the admissible region.
    Infeasible(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(what) => write!(f, "parameter `{what}` is outside its domain"),
            Error::UndefinedConditional => {
                write!(f, "conditional probability undefined: conditioning event has mass zero")
            }
            Error::ConstantSeries => {
                write!(f, "series is constant: sample autocorrelation undefined")
            }
            Error::SeriesTooShort { needed, got } => {
                write!(f, "series too short: need at least {needed} observations, got {got}")
            }
            Error::NoConvergence => write!(f, "iteration did not converge"),
            Error::FitDidNotConverge(best) => write!(
                f,
                "no optimizer start converged (best objective {:.6})",
                -best.loglik
            ),
            Error::SingularInformation => write!(f, "observed information matrix is singular"),
            Error::PhiBoundary => {
                write!(f, "score undefined at phi in {{0, 1}}: mixture term vanishes")
            }
            Error::Infeasible(what) => {
                write!(f, "moment equations infeasible: {what}")
            }
        }
    }
}

impl core::error::Error for Error {}
