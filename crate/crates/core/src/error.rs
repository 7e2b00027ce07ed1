use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
/// Agent indices are stored zero-based and printed one-based.
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{matrix}{} is not symmetric", at_time(*.time))]
    NotSymmetric { matrix: String, time: Option<usize> },

    #[error("{matrix}{} is not positive definite (min eigenvalue {min_eigenvalue:.3e})", at_time(*.time))]
    NotPositiveDefinite {
        matrix: String,
        time: Option<usize>,
        min_eigenvalue: f64,
    },

    #[error("{matrix}{} is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})", at_time(*.time))]
    NotPositiveSemidefinite {
        matrix: String,
        time: Option<usize>,
        min_eigenvalue: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("innovation covariance of agent {} at t={t} is singular", .agent + 1)]
    SingularInnovation { agent: usize, t: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("agent {} is missing the measurement of neighbor {}", .agent + 1, .neighbor + 1)]
    MissingMeasurement { agent: usize, neighbor: usize },

    #[error("affine-map step matrix of agent {} at t={t} is singular", .agent + 1)]
    SingularStep { agent: usize, t: usize },

    #[error("error covariance of agent {} at t={t} is not invertible", .agent + 1)]
    NotInvertibleCovariance { agent: usize, t: usize },

    #[error("agent {} fails the observability rank test (rank {rank} < {required})", .agent + 1)]
    ObservabilityViolation {
        agent: usize,
        rank: usize,
        required: usize,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}

fn at_time(t: Option<usize>) -> String {
    match t {
        Some(t) => format!(" at t={t}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn at_iteration(self, iteration: usize) -> Self {
        Error::AtIteration {
            iteration,
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping iteration context.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtIteration { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for errors caused by malformed input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self.root(),
            Error::DimensionMismatch(_)
                | Error::NotSymmetric { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::NotPositiveSemidefinite { .. }
                | Error::InvalidParameter(_)
                | Error::Config(_)
        )
    }
}
