use thiserror::Error;

/// Errors raised anywhere in the numerical pipeline.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix has zero determinant")]
    ZeroDeterminant,
    #[error("evaluation hit a pole at {0}")]
    PoleHit(String),
    #[error("evaluation touches the branch cut [0, inf) at {0}")]
    BranchCut(String),
    #[error("kernel requested at a degenerate pair z = conj(w)")]
    DegeneratePair,
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("measure violates the growth condition: {0}")]
    GrowthViolated(String),
    #[error("insufficient grid: {0}")]
    InsufficientGrid(String),
    #[error("extrapolation did not converge: {0}")]
    NonConvergent(String),
    #[error("power-law fit failed: {0}")]
    FitFailed(String),
    #[error("measure and transform do not form a Tauberian pair: {0}")]
    MismatchedPair(String),
    #[error("degenerate denominator in the limit formula")]
    DegenerateDenominator,
    #[error("no spectral measure available: {0}")]
    MeasureUnavailable(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("Weyl function did not converge: {0}")]
    NoConvergence(String),
    #[error("Riccati integration failed: {0}")]
    RiccatiBlowup(String),
    #[error("unknown catalog id {0}")]
    UnknownId(String),
    #[error("boundary block has rank below two")]
    RankDeficient,
    #[error("boundary pair does not define a self-adjoint condition")]
    NonSelfAdjoint,
    #[error("function has a pole on the negative half-axis")]
    PoleOnAxis,
    #[error("coupling denominator vanishes")]
    DenominatorZero,
    #[error("coupled operator is not nonnegative")]
    NotNonnegative,
    #[error("certificate is missing constant {0}")]
    MissingConstant(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
