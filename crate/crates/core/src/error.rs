use core::fmt;

use crate::expr::EvalError;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the model, synthesis, checking and simulation layers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A coefficient expression could not be evaluated.
    Eval(EvalError),
    /// A time lies outside the horizon covered by a coefficient.
    OutsideHorizon { t: f64, start: f64, end: f64 },
    /// Pieces or switching levels are not contiguous, ordered and non-empty.
    InvalidPieces(&'static str),
    /// Only derivative orders 0, 1 and 2 are tracked per piece.
    UnsupportedOrder(usize),
    /// The leading coefficient is zero (or changes sign) at `t`.
    LeadingCoefficientVanishes { t: f64 },
    /// A real square root of the leading coefficient is required at `t`.
    NonPositiveLeading { t: f64, value: f64 },
    /// The operation needs a system of a different order.
    WrongOrder { expected: usize, found: usize },
    /// The constants do not select the requested partner order.
    InvalidConstants(&'static str),
    /// A block matrix of the non-relaxed conditions is singular at `t`.
    SingularBlock { t: f64 },
    /// Only the zero initial condition is admissible (`delta` is the determinant).
    ZeroIcOnly { delta: f64 },
    /// The admissible-IC ray is undefined when `k1 = 0`.
    FeedbackCase,
    /// Bad simulation or checking window.
    InvalidWindow { start: f64, end: f64 },
    /// Non-positive or non-finite step size.
    InvalidStep(f64),
    /// Initial states given at different times.
    IcTimeMismatch { expected: f64, found: f64 },
    /// Two trajectories do not share the same time grid.
    GridMismatch,
}

impl From<EvalError> for Error {
    fn from(e: EvalError) -> Self {
        Error::Eval(e)
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Eval(e) => write!(f, "{e}"),
            Error::OutsideHorizon { t, start, end } => {
                write!(f, "t = {t} is outside the coefficient horizon [{start}, {end})")
            }
            Error::InvalidPieces(why) => write!(f, "invalid piecewise definition: {why}"),
            Error::UnsupportedOrder(n) => write!(f, "derivative order {n} is not supported (max 2)"),
            Error::LeadingCoefficientVanishes { t } => {
                write!(f, "leading coefficient vanishes at t = {t}")
            }
            Error::NonPositiveLeading { t, value } => write!(
                f,
                "leading coefficient must be positive, found {value} at t = {t}"
            ),
            Error::WrongOrder { expected, found } => {
                write!(f, "expected a system of order {expected}, found order {found}")
            }
            Error::InvalidConstants(why) => write!(f, "invalid constants: {why}"),
            Error::SingularBlock { t } => write!(f, "singular block matrix at t = {t}"),
            Error::ZeroIcOnly { delta } => write!(
                f,
                "only the zero initial condition is admissible (determinant {delta})"
            ),
            Error::FeedbackCase => write!(f, "k1 = 0: no initial-condition ray, see feedback case"),
            Error::InvalidWindow { start, end } => write!(f, "invalid window ({start}, {end})"),
            Error::InvalidStep(h) => write!(f, "invalid step size {h}"),
            Error::IcTimeMismatch { expected, found } => write!(
                f,
                "initial state given at t = {found}, expected t = {expected}"
            ),
            Error::GridMismatch => write!(f, "trajectories are sampled on different time grids"),
        }
    }
}

impl core::error::Error for Error {}
