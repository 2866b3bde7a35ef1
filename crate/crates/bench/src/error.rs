use std::path::PathBuf;

use contactbench_core::ContactError;
use contactbench_sim::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown scenario '{name}' (valid: {})", valid.join(", "))]
    UnknownScenario { name: String, valid: Vec<String> },

    #[error(transparent)]
    Sim(#[from] SimError),

    #[error(transparent)]
    Solver(#[from] ContactError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
