use tembed_core::C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("jump-point equations did not converge: residual {0:e}")]
    JumpSolve(f64),
    #[error("correspondence lost monotonicity")]
    Monotonicity,
    #[error("surface is not space-like: ratio {0} at {1}")]
    NotSpacelike(f64, C64),
    #[error("singular parametrization at {0}")]
    Singular(C64),
    #[error("point {0} is outside the parametrized domain")]
    OutOfDomain(C64),
    #[error("coincident points")]
    Coincident,
}

pub type Result<T> = std::result::Result<T, SurfaceError>;
