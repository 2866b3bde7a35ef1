use thiserror::Error;

/// Errors raised while building or solving a contact problem.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContactError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{field}: expected {expected} entries, got {actual}")]
    Dimension {
        field: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("singular diagonal block at contact {contact}")]
    SingularBlock { contact: usize },

    #[error("factorization of the regularized Delassus matrix failed (rho = {rho:e})")]
    Factorization { rho: f64 },

    #[error("sliding sub-problem failed at contact {contact}: {reason}")]
    SlidingSolve { contact: usize, reason: String },

    #[error("no disjunctive branch satisfies the contact law (best residual {best_residual:e})")]
    OracleFailure { best_residual: f64 },

    #[error("{stage} stage: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<ContactError>,
    },
}

pub type Result<T, E = ContactError> = std::result::Result<T, E>;
