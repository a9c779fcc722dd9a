use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum FtError {
    #[error("state outside working range: {0}")]
    Domain(String),

    #[error("model degeneracy: {0}")]
    Model(String),

    #[error("eigenvalue separation violated: {0}")]
    BandOverlap(String),

    #[error("discretization: {0}")]
    Discretization(String),

    #[error("riemann problem has no solution in the state domain: {0}")]
    Amplitude(String),

    #[error("event budget of {budget} exceeded at t = {t}")]
    EventBudget { budget: usize, t: f64 },

    #[error("time {0} outside the run horizon")]
    TimeRange(f64),

    #[error("runs incompatible: {0}")]
    Mismatch(String),

    #[error("weight construction failed: {0}")]
    WeightConstruction(String),

    #[error("re-perturbation requested: {0}")]
    Perturbation(String),

    #[error("scenario invalid at `{field}`: {reason}")]
    Scenario { field: String, reason: String },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, FtError>;
