use thiserror::Error;

use crate::padic::PadicError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("matrix is singular at working precision")]
    Singular,
    #[error("radius exponent {m} is outside the supported range |m| <= {max}")]
    RadiusOutOfRange { m: i64, max: i64 },
    #[error("paths have different lengths ({0} and {1})")]
    PathLength(usize, usize),
    #[error("path is not a geodesic at position {0}")]
    NotGeodesic(usize),
    #[error("vertices are not adjacent")]
    NotAdjacent,
    #[error("element is not in the congruence subgroup")]
    NotInGroup,
    #[error("level k must be at least 1")]
    BadLevel,
    #[error("target ball is not contained in the domain ball")]
    NotSubset,
    #[error("composite is not analytic on the ball")]
    NotAnalytic,
    #[error("insufficient guard: discarded coefficient has valuation {valuation}, need {needed}")]
    InsufficientGuard { valuation: i64, needed: i64 },
    #[error("chain is not in the kernel of the augmentation")]
    NotInKernel,
    #[error("chain has {got} components, registry has {expected}")]
    IndexMismatch { got: usize, expected: usize },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
