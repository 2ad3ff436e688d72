use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Evaluation produced an infinite or NaN value.
    Range,
    DimensionMismatch { expected: usize, found: usize },
    InvalidParameter(&'static str),
    /// A point handed to the quotient box lies outside the closed polydisk.
    OutsideBox,
    /// Expression text could not be parsed; `pos` is a byte offset.
    Parse { pos: usize, msg: &'static str },
    /// A contour computation could not be resolved by sampling.
    Inconclusive(Inconclusive),
    /// A point handed to an escape certificate is not in any detected basin.
    NotInBasin,
    EmptySurvivingSet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Inconclusive {
    /// The sampled curve passes within tolerance of the reference point.
    NearZero { min_modulus: f64 },
    /// Argument increments did not drop below π/2 before the sample cap.
    RefinementCap { samples: usize },
    /// The summed argument was not close enough to an integer multiple of 2π.
    Residual { residual: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Range => write!(f, "evaluation left the finite range"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::OutsideBox => write!(f, "point lies outside the closed polydisk"),
            Error::Parse { pos, msg } => write!(f, "parse error at byte {pos}: {msg}"),
            Error::Inconclusive(why) => write!(f, "inconclusive contour test: {why}"),
            Error::NotInBasin => write!(f, "point is not in any detected basin"),
            Error::EmptySurvivingSet => write!(f, "surviving set is empty"),
        }
    }
}

impl fmt::Display for Inconclusive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inconclusive::NearZero { min_modulus } => {
                write!(f, "curve passes near the origin (min modulus {min_modulus:e})")
            }
            Inconclusive::RefinementCap { samples } => {
                write!(f, "refinement cap reached at {samples} samples")
            }
            Inconclusive::Residual { residual } => write!(f, "residual {residual} too large"),
        }
    }
}

impl core::error::Error for Error {}
