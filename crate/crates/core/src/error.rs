use core::fmt;

use num_complex::Complex64;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// `make_grid` needs at least two intervals.
    GridTooCoarse { n_intervals: usize },
    /// Two sampled objects live on different grids.
    GridMismatch { expected: usize, found: usize },
    IndexOutOfRange { index: usize, len: usize },
    /// An evaluation point outside `[0, π]`.
    OutOfDomain { x: f64 },
    InvalidArgument(&'static str),
    TooManyComponents { count: usize, max: usize },
    /// The successive-approximation series did not reach the tolerance.
    PicardNotConverged { terms: usize, last_norm: f64, tol: f64 },
    InvalidWindow,
    /// `|Δ|` is too small on a contour that cannot be moved.
    BoundaryNearZero { point: Complex64, value: f64 },
    PhaseTracking { point: Complex64 },
    /// `B(x)` vanishes (numerically) somewhere on `(0, π]`.
    ConditionViolated { x: f64, value: f64 },
    /// A stage of the sequential recovery failed.
    Stage { stage: usize, reason: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::GridTooCoarse { n_intervals } => {
                write!(f, "grid needs at least 2 intervals, got {n_intervals}")
            }
            Error::GridMismatch { expected, found } => {
                write!(f, "grid mismatch: expected {expected} intervals, found {found}")
            }
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for length {len}")
            }
            Error::OutOfDomain { x } => write!(f, "point {x} lies outside [0, pi]"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::TooManyComponents { count, max } => {
                write!(f, "{count} kernel components requested, at most {max} supported")
            }
            Error::PicardNotConverged { terms, last_norm, tol } => write!(
                f,
                "successive approximations did not converge after {terms} terms \
                 (last term norm {last_norm:e}, tolerance {tol:e})"
            ),
            Error::InvalidWindow => write!(f, "search window must satisfy re_min < re_max and im_min < im_max"),
            Error::BoundaryNearZero { point, value } => write!(
                f,
                "characteristic function nearly vanishes on the window boundary at {point} (|value| = {value:e})"
            ),
            Error::PhaseTracking { point } => {
                write!(f, "phase tracking failed to resolve the argument near {point}")
            }
            Error::ConditionViolated { x, value } => {
                write!(f, "weight B(x) vanishes at x = {x} (|B| = {value:e})")
            }
            Error::Stage { stage, reason } => write!(f, "stage {stage} failed: {reason}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
