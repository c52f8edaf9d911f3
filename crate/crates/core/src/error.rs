use num_complex::Complex64;
use thiserror::Error;

use crate::pair::PairSolveResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coefficient or sample data contains a non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("required ratio R_{index} is undefined (divisor below the zero guard)")]
    MissingRatio { index: usize },

    #[error("singularity at {location} is not outside the unit circle")]
    InsideContour { location: Complex64 },

    #[error("evaluation point {point} lies on a branch cut")]
    OnBranchCut { point: Complex64 },

    #[error("evaluation point {point} coincides with a singularity")]
    AtSingularity { point: Complex64 },

    #[error("requested {requested} coefficients from {samples} samples exceeds the aliasing bound")]
    AliasingBound { requested: usize, samples: usize },

    #[error("sample grid must be equispaced with an even count of at least 8 points: {reason}")]
    BadGrid { reason: String },

    #[error("input is not real within tolerance")]
    NotReal,

    #[error("order-by-order estimates are ill-conditioned at every available order")]
    IllConditioned,

    #[error("no real root of the order equation passed verification")]
    NoRealRoot,

    #[error("the two recovered locations coincide (degenerate discriminant)")]
    DegenerateDiscriminant,

    #[error("Newton iteration did not converge within {starts} starts")]
    NonConvergence { starts: usize },

    #[error("Newton stalled on the equal-order manifold; the equal-order solution is attached")]
    SymmetryDegenerate(Box<PairSolveResult>),

    #[error("no complete sign run in the coefficient sequence")]
    NoCompleteRun,

    #[error("constant term is zero; the formal logarithm does not exist")]
    ZeroConstantTerm,

    #[error("ratios alternate in sign or rotate in the complex plane; try sign-run analysis")]
    OscillatingRatios,

    #[error("not enough ratio points for a fit window ({available} available, {needed} needed)")]
    InsufficientWindow { available: usize, needed: usize },

    #[error("peeling stage {stage} did not reduce the residual")]
    PeelStalled { stage: usize },

    #[error("logarithmic terms have no closed-form complement")]
    UnsupportedKind,

    #[error("point {point} is within {distance:.3e} of the contour; refine the grid")]
    TooCloseToContour { point: Complex64, distance: f64 },

    #[error("point {point} is on the wrong side of the unit circle for the requested integral")]
    WrongSide { point: Complex64 },

    #[error("line grid is not symmetric and equispaced about the origin")]
    AsymmetricGrid,
}

impl Error {
    /// Short stable identifier used in report verdicts.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonFinite { .. } => "NonFinite",
            Error::TooShort { .. } => "TooShort",
            Error::MissingRatio { .. } => "MissingRatio",
            Error::InsideContour { .. } => "InsideContour",
            Error::OnBranchCut { .. } => "OnBranchCut",
            Error::AtSingularity { .. } => "AtSingularity",
            Error::AliasingBound { .. } => "AliasingBound",
            Error::BadGrid { .. } => "BadGrid",
            Error::NotReal => "NotReal",
            Error::IllConditioned => "IllConditioned",
            Error::NoRealRoot => "NoRealRoot",
            Error::DegenerateDiscriminant => "DegenerateDiscriminant",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::SymmetryDegenerate(_) => "SymmetryDegenerate",
            Error::NoCompleteRun => "NoCompleteRun",
            Error::ZeroConstantTerm => "ZeroConstantTerm",
            Error::OscillatingRatios => "OscillatingRatios",
            Error::InsufficientWindow { .. } => "InsufficientWindow",
            Error::PeelStalled { .. } => "PeelStalled",
            Error::WrongSide { .. } => "WrongSide",
            Error::UnsupportedKind => "UnsupportedKind",
            Error::TooCloseToContour { .. } => "TooCloseToContour",
            Error::AsymmetricGrid => "AsymmetricGrid",
        }
    }
}
