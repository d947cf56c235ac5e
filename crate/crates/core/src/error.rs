use core::fmt;

/// Failure modes shared by every module of the solver library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Bad input: wrong dimension, non-positive tolerance, non-SPD data, ...
    InvalidArgument(&'static str),
    /// A vector had the wrong length.
    DimensionMismatch { expected: usize, found: usize },
    /// Root bracketing or bisection did not terminate.
    NumericFailure(&'static str),
    /// The 2x2 plane system is singular; the caller should take the LD branch.
    DegeneratePlane,
    /// The inner plane solver hit its iteration cap far from the tolerance.
    InnerStall { grad_norm: f64, threshold: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NumericFailure(msg) => write!(f, "numeric failure: {msg}"),
            Error::DegeneratePlane => write!(f, "degenerate plane: gradients are collinear"),
            Error::InnerStall {
                grad_norm,
                threshold,
            } => write!(
                f,
                "inner plane solver stalled: |grad F| = {grad_norm:e} > threshold {threshold:e}"
            ),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
