//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Both arctangent arguments vanish: the Bogoliubov angle is undefined
    /// at this momentum (exact criticality with k on the singular momentum).
    #[error("degenerate mode at k = {k}: Bogoliubov angle undefined")]
    DegenerateMode { k: f64 },

    #[error("cumulant order {requested} exceeds the exact-coefficient table (max {max})")]
    OrderTooLarge { requested: usize, max: usize },

    #[error("zeta sum diverges: alpha = {alpha} <= d = {d} with no truncation")]
    Divergence { alpha: f64, d: usize },

    /// The characteristic function has not decayed below the cutoff
    /// threshold within the scanned range; the inversion integral would be
    /// truncated with uncontrolled error.
    #[error("characteristic function has not decayed below {threshold:e} by s = {s_max}")]
    TruncationError { threshold: f64, s_max: f64 },

    #[error("inverted density integrates to {mass} (|mass - 1| > {tol})")]
    NormalizationFailure { mass: f64, tol: f64 },

    /// Excited spectral weights sum to >= 1, leaving no ground-state weight:
    /// the quench is too large for perturbative weights.
    #[error("excited spectral weights sum to {sum} >= 1")]
    WeightOverflow { sum: f64 },

    #[error("alpha = {alpha} outside [0, 1): hypergeometric series undefined")]
    AlphaOutOfRange { alpha: f64 },

    #[error("covariance eigenvalue {value} outside [0, 1]")]
    NonPhysicalCovariance { value: f64 },

    #[error("ground state not unique: gap {gap:e} below resolution {resolution:e}")]
    DegenerateGroundState { gap: f64, resolution: f64 },

    #[error("matrix dimension {dim} exceeds limit {limit}")]
    DimensionLimit { dim: usize, limit: usize },

    #[error("state vector norm {norm} differs from 1 by more than {tol:e}")]
    UnnormalizedState { norm: f64, tol: f64 },

    #[error("non-positive value in log-log fit: {value} at index {index}")]
    NonPositiveValue { value: f64, index: usize },

    #[error("matrix is not Hermitian: max |A - A^dagger| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
