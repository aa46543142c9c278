//! Crate-wide error type.

use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Exact integer arithmetic would overflow the 128-bit accumulators.
    /// Counts are never allowed to wrap; the operation is rejected instead.
    Capacity { what: &'static str },
    /// Predicted cost of the operation exceeds the configured budget.
    Budget {
        what: &'static str,
        needed: u128,
        limit: u128,
    },
    /// Linear form system violates the pairwise-minor nondegeneracy condition.
    DegenerateSystem,
    /// Not enough data points for the requested fit.
    InsufficientData { needed: usize, got: usize },
    /// Parameter outside the operation's domain.
    Domain(&'static str),
    /// A nominally real quantity came out with a non-negligible imaginary
    /// part, which signals an arithmetic bug rather than rounding.
    ImaginaryResidue { q: u64, imag_abs: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Capacity { what } => {
                write!(f, "exact-arithmetic capacity exceeded in {what}")
            }
            Error::Budget {
                what,
                needed,
                limit,
            } => {
                write!(f, "budget exceeded in {what}: needs {needed}, limit {limit}")
            }
            Error::DegenerateSystem => {
                write!(f, "linear form system is degenerate (a 2x2 minor vanishes)")
            }
            Error::InsufficientData { needed, got } => {
                write!(f, "insufficient data: need {needed} points, got {got}")
            }
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::ImaginaryResidue { q, imag_abs } => {
                write!(
                    f,
                    "non-real exponential sum term at q={q} (|Im| = {imag_abs:e})"
                )
            }
        }
    }
}

impl core::error::Error for Error {}
