use thiserror::Error;

/// Errors produced by the numerics layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("time must be positive, got t = {0}")]
    NonPositiveTime(f64),

    #[error("dimension must satisfy 2 <= d <= {max}, got {d}")]
    UnsupportedDimension { d: u32, max: u32 },

    #[error("quadrature failed to converge: {0}")]
    QuadratureFailure(String),

    #[error("arccosh argument {0} below tolerated rounding threshold")]
    DistanceDomain(f64),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("mass mismatch between density and reference: relative gap {0:.3e}")]
    MassMismatch(f64),

    #[error("reference profile vanishes at a node where the density is positive (rho = {0})")]
    ReferenceVanishes(f64),

    #[error("solver step size underflow at t = {t}: dt = {dt:.3e}")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("solution bulk escaped the computational window at t = {0}")]
    DomainOverflow(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate regression: {0}")]
    DegenerateFit(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
