use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside [0, 1]")]
    PurityOutOfRange { what: &'static str, value: f64 },

    #[error("Bloch vector norm {0} exceeds 1")]
    NotAState(f64),

    #[error("prior parameter lambda = {0} is not normalizable (need lambda < 1)")]
    InvalidPrior(f64),

    #[error("prior density diverges at r = 1 for lambda = {0}")]
    DivergentDensity(f64),

    #[error("invalid spin block: N = {n}, 2j = {two_j}")]
    InvalidBlock { n: u64, two_j: u64 },

    #[error("quadrature did not converge for block N = {n}, 2j = {two_j}: estimated error {estimate:e}")]
    QuadratureFailure { n: u64, two_j: u64, estimate: f64 },

    #[error("both block integrals are zero")]
    DegenerateIntegrals,

    #[error("axis norm {0} is not 1")]
    NonUnitAxis(f64),

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("need at least {needed} shots, got {got}")]
    TooFewShots { needed: u64, got: u64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("{0} is singular at r = 1")]
    Singular(&'static str),

    #[error("non-positive value {0} in log-log fit")]
    NonPositive(f64),
}

impl Error {
    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::QuadratureFailure { .. })
    }
}
