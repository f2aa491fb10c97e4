use thiserror::Error;

pub type Result<T> = std::result::Result<T, FgsrError>;

#[derive(Debug, Error)]
pub enum FgsrError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("SVD did not converge within an iteration budget of {budget}")]
    SvdNoConvergence { budget: usize },

    #[error("infeasible rank: factor width {d} is below rank {rank}")]
    InfeasibleRank { d: usize, rank: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("observation set is empty")]
    EmptyObservations,

    /// Carries the objective trace up to the failing iteration.
    #[error("solver diverged at iteration {iteration}: {quantity} = {value:e}")]
    Diverged {
        iteration: usize,
        quantity: &'static str,
        value: f64,
        objective_trace: Vec<f64>,
    },

    #[error("unknown method `{name}`; registered methods: {}", registered.join(", "))]
    UnknownMethod {
        name: String,
        registered: Vec<&'static str>,
    },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("no ratings left after filtering items with fewer than {min_ratings} ratings")]
    EmptyRatings { min_ratings: usize },

    #[error("{failed} of {total} verification checks failed")]
    VerificationFailed { failed: usize, total: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl FgsrError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        FgsrError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
