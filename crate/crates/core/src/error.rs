use thiserror::Error;

/// Every failure mode of the numerics, in one place.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the function.
    #[error("domain error in {function}: {detail}")]
    Domain { function: &'static str, detail: String },

    /// A series was requested outside its region of convergence.
    #[error("divergent series in {function}: {detail}")]
    Divergent { function: &'static str, detail: String },

    /// An iteration ran out of budget before its stopping rule fired.
    #[error("no convergence in {function} after {iterations} iterations")]
    NonConvergence { function: &'static str, iterations: usize },

    /// Adaptive quadrature could not bring its error estimate below the target.
    #[error("quadrature stalled: estimate {estimate:e} with error {error:e} above target {target:e}")]
    Quadrature { estimate: f64, error: f64, target: f64 },

    /// The parameter family has no supported evaluation route.
    #[error("unsupported family: {0}")]
    Unsupported(String),

    /// The Fock-space cutoff discards more weight than the tolerance allows.
    #[error("truncation insufficient: tail weight {tail:e} >= tolerance {tol:e} at n_max = {n_max}")]
    TruncationInsufficient { tail: f64, tol: f64, n_max: usize },

    /// A rational factor of the deformation function vanishes.
    #[error("singular deformation factor at n = {0}")]
    Singular(usize),

    /// Two-level system with e1 <= e0.
    #[error("degenerate levels: e1 = {e1} must exceed e0 = {e0}")]
    DegenerateLevels { e0: f64, e1: f64 },

    /// Model parameters violate an invariant.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Vector lengths disagree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The requested point lies beyond the numerically representable support.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// Operation is not defined for the requested state kind or spectrum.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    /// Stable short name, used by the CLI when reporting numeric failures.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::Divergent { .. } => "divergent",
            Error::NonConvergence { .. } => "non-convergence",
            Error::Quadrature { .. } => "quadrature",
            Error::Unsupported(_) => "unsupported",
            Error::TruncationInsufficient { .. } => "truncation-insufficient",
            Error::Singular(_) => "singular",
            Error::DegenerateLevels { .. } => "degenerate-levels",
            Error::InvalidModel(_) => "invalid-model",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::OutOfRange(_) => "out-of-range",
            Error::Precondition(_) => "precondition",
        }
    }

    pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain { function, detail: detail.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
