use thiserror::Error;

/// Errors raised by the numerical laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix has a negative eigenvalue {0:.3e}")]
    NegativeEigenvalue(f64),

    #[error("dimension {dim} exceeds the configured maximum {max}")]
    DimensionOverflow { dim: usize, max: usize },

    #[error("matrix is not square: {0}x{1}")]
    NonSquare(usize, usize),

    #[error("matrix is singular (smallest singular value {0:.3e})")]
    Singular(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("site {site} is out of range for {num_sites} sites")]
    SiteOutOfRange { site: usize, num_sites: usize },

    #[error("block has dimension {got}, expected site dimension {expected}")]
    WrongBlockDim { expected: usize, got: usize },

    #[error("element belongs to a different algebra")]
    AlgebraMismatch,

    #[error("invalid density matrix at site {site}: {reason}")]
    InvalidDensity { site: usize, reason: String },

    #[error("state is singular: smallest eigenvalue {0:.3e}")]
    StateSingular(f64),

    #[error("site densities {0} and {1} do not commute (commutator norm {2:.3e})")]
    NonCommutingDensities(usize, usize, f64),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("group is not closed: {0}")]
    NotAGroup(String),

    #[error("invalid group chain: {0}")]
    InvalidChain(String),

    #[error("work budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("state is not strongly quasi-invariant for element {element}: {reason}")]
    NotQuasiInvariant { element: String, reason: String },

    #[error("missing Radon-Nikodym derivative for element {0}")]
    MissingDerivative(usize),

    #[error("dense operator of dimension {dim} exceeds the dense cap {cap}")]
    DenseCapExceeded { dim: usize, cap: usize },

    #[error("consistency failure: {0}")]
    ConsistencyFailure(String),

    #[error("Hypothesis (H) violated: |Phi_G|^2 = {0:.3e}")]
    HypothesisHViolated(f64),

    #[error("cocycle elements do not commute (residual {0:.3e})")]
    NonCommutingCocycle(f64),

    #[error("conditional expectation mode does not match the argument")]
    ModeMismatch,

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
