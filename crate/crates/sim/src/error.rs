use contactbench_core::ContactError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("unsupported geometry between bodies {first} and {second}: boxes tilted by {tilt_deg:.2} deg are not face-parallel")]
    UnsupportedGeometry { first: usize, second: usize, tilt_deg: f64 },

    #[error(transparent)]
    Solver(#[from] ContactError),
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
