use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("variable index {index} out of range for a pmf with {len} variables")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("variable sets must be pairwise disjoint")]
    OverlappingSets,

    #[error("alphabet product {size} exceeds the dense cap {cap}")]
    TooLarge { size: usize, cap: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("relay {relay} violates the conditional-independence Markov chain (I = {cmi:.3e} bits)")]
    MarkovViolation { relay: usize, cmi: f64 },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("{count} relays exceeds the exhaustive-enumeration cap {cap}")]
    TooManyRelays { count: usize, cap: usize },

    #[error("noise covariance of relay {relay} is singular or not positive definite")]
    SingularNoise { relay: usize },

    #[error("matrix condition number {cond:.3e} exceeds the guard 1e12")]
    IllConditioned { cond: f64 },

    #[error("quantizer of relay {relay} is outside 0 ⪯ B ⪯ Σ⁻¹ (whitened eigenvalue {eigenvalue})")]
    InfeasibleQuantizer { relay: usize, eigenvalue: f64 },

    #[error("infeasible time-sharing policy: {0}")]
    InfeasibleTimeShare(String),

    #[error("extreme point at ordering position {position} has a zero Wyner-Ziv denominator with g = {g_prev}")]
    DegenerateAlpha { position: usize, g_prev: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("objective returned a non-finite value at {0}")]
    NonFinite(String),

    #[error("optimizer failed: {0}")]
    OptimizerFailed(String),

    #[error("model outside its domain: {0}")]
    ModelDomain(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
