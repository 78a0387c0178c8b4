use thiserror::Error;

/// Errors raised by the geometric evaluators and checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("invalid weight pair ({k}, {l}): {reason}")]
    InvalidWeights { k: u32, l: u32, reason: &'static str },
    #[error("point is degenerate for this chart: {0}")]
    DegeneratePoint(String),
    #[error("coordinate outside chart domain: {0}")]
    DomainError(String),
    #[error("point lies on the exceptional curve (zero section)")]
    OnExceptionalSet,
    #[error("point is not singular")]
    NotSingular,
    #[error("metric is singular or not positive-definite at the evaluation point")]
    SingularMetric,
    #[error("finite-difference step too large: Richardson estimates disagree ({0:.3e})")]
    StepTooLarge(f64),
    #[error("ODE integration failed: {0}")]
    StepFailure(String),
    #[error("monotone reparametrization fit failed: {0}")]
    FitFailure(String),
    #[error("evaluation point coincides with a source")]
    AtSource,
    #[error("evaluation point lies on a Dirac string")]
    OnString,
    #[error("gradient of the potential vanishes (|grad U| = {0:.3e})")]
    CriticalPoint(f64),
    #[error("no single constant matches the two metrics (spread {0:.3e})")]
    NoSingleConstant(f64),
    #[error("region too small: {0}")]
    RegionTooSmall(String),
    #[error("automorphism does not preserve the lattice (defect {0:.3e})")]
    NotInvariant(f64),
    #[error("fixed-point set is not isolated")]
    NotIsolated,
    #[error("weights ({k}, {l}) do not sum to the cone order {p}")]
    WeightMismatch { p: u32, k: u32, l: u32 },
    #[error("primitive check failed: sup |d eta - omega| = {0:.3e}")]
    BadPrimitive(f64),
    #[error("primitive residual too large: {0:.3e}")]
    ResidualTooLarge(f64),
    #[error("3-form is not in the positive orbit")]
    NotPositive,
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;

impl GeomError {
    /// Configuration problems versus numerical breakdowns; used for the CLI exit-code contract.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            GeomError::Config(_)
                | GeomError::InvalidWeights { .. }
                | GeomError::WeightMismatch { .. }
                | GeomError::RegionTooSmall(_)
        )
    }
}
