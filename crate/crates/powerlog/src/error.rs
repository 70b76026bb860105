use thiserror::Error;

/// Everything that can go wrong in the library.
///
/// The variant name is part of the public contract: the command line tool
/// echoes it verbatim, see [`Error::name`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series has no stored terms")]
    ZeroSeries,
    #[error("exactness region is empty")]
    EmptyRegion,
    #[error("series is infinite and its region is unbounded; give a finite region")]
    UnboundedRegion,
    #[error("transcendental constant needed in exact mode ({0})")]
    NeedsFloatMode(String),
    #[error("leading term is not a positive log-free monomial")]
    NotLH,
    #[error("series is not parabolic")]
    NotParabolic,
    #[error("change of variables must have leading term a*x with a > 0")]
    NotL0,
    #[error("series is not strongly hyperbolic")]
    NotStronglyHyperbolic,
    #[error("strongly hyperbolic series do not embed in a flow")]
    StronglyHyperbolicNotEmbeddable,
    #[error("vector field of order below x has no flow")]
    NoFlow,
    #[error("weak summation did not settle after {0} iterations")]
    NonConvergence(usize),
    #[error("exponent {0} is not rational")]
    IrrationalExponent(String),
    #[error("region exhausted before the target was reached: {0}")]
    RegionExhausted(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("inadmissible change of variables x + c*x^{beta}*L^{m}")]
    InadmissibleChange { beta: String, m: i64 },
    #[error("exponent of x must be positive: {0}")]
    NonPositiveAlpha(String),
    #[error("generator must have positive alpha: {0}")]
    InvalidGenerator(String),
    #[error("parse error at {pos}: expected {}", expected.join(" | "))]
    Parse { pos: usize, expected: Vec<String> },
}

impl Error {
    pub fn name(&self) -> &'static str {
        match self {
            Error::ZeroSeries => "ZeroSeries",
            Error::EmptyRegion => "EmptyRegion",
            Error::UnboundedRegion => "UnboundedRegion",
            Error::NeedsFloatMode(_) => "NeedsFloatMode",
            Error::NotLH => "NotLH",
            Error::NotParabolic => "NotParabolic",
            Error::NotL0 => "NotL0",
            Error::NotStronglyHyperbolic => "NotStronglyHyperbolic",
            Error::StronglyHyperbolicNotEmbeddable => "StronglyHyperbolicNotEmbeddable",
            Error::NoFlow => "NoFlow",
            Error::NonConvergence(_) => "NonConvergence",
            Error::IrrationalExponent(_) => "IrrationalExponent",
            Error::RegionExhausted(_) => "RegionExhausted",
            Error::NotApplicable(_) => "NotApplicable",
            Error::NoSolution(_) => "NoSolution",
            Error::InadmissibleChange { .. } => "InadmissibleChange",
            Error::NonPositiveAlpha(_) => "NonPositiveAlpha",
            Error::InvalidGenerator(_) => "InvalidGenerator",
            Error::Parse { .. } => "ParseError",
        }
    }

    /// Parse errors are input errors; everything else is a domain error.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::NonPositiveAlpha(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
