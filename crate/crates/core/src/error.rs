use core::fmt;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A curve parameter or interval fell outside `[0, 1]`.
    Domain { what: &'static str, value: f64 },
    /// A curve had zero (or non-finite) total arc length.
    ZeroLength,
    /// A model or settings value violated its invariant.
    InvalidParameter { name: &'static str, reason: &'static str },
    /// A link vector was too short to define a direction.
    DegenerateLink { index: usize },
    /// The seed configuration does not fit the robot or its joint limits.
    InvalidSeed { reason: &'static str },
    /// Two inputs that must agree in size did not.
    DimensionMismatch { expected: usize, found: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what} = {value} is outside [0, 1]"),
            Error::ZeroLength => f.write_str("curve has zero total arc length"),
            Error::InvalidParameter { name, reason } => write!(f, "invalid {name}: {reason}"),
            Error::DegenerateLink { index } => write!(f, "link {index} has (near) zero length"),
            Error::InvalidSeed { reason } => write!(f, "invalid seed: {reason}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
