use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("coherent state at x = {center} has boundary amplitude {amplitude:e} (limit 1e-12)")]
    BoundaryMass { center: f64, amplitude: f64 },
    #[error("alias guard violated: |xi| = {xi} exceeds {limit}")]
    Alias { xi: f64, limit: f64 },
    #[error("translated support [{lo}, {hi}] leaves the safe window [{min}, {max}]")]
    WrapAround { lo: f64, hi: f64, min: f64, max: f64 },
    #[error("reflected support [{lo}, {hi}] leaves the grid [{min}, {max}]")]
    OutOfDomain { lo: f64, hi: f64, min: f64, max: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("coverage: {0}")]
    Coverage(String),
    #[error("boundary leakage {leak:e} exceeds {limit:e}")]
    Leakage { leak: f64, limit: f64 },
    #[error("quadrature truncation: {0}")]
    QuadratureTruncation(String),
    #[error("quadrature did not converge: relative change {change:e} > {limit:e}")]
    QuadratureDivergence { change: f64, limit: f64 },
    #[error("step count {steps} exceeds {limit}")]
    StepOverflow { steps: f64, limit: f64 },
    #[error("CFL guard violated: {0}")]
    Cfl(String),
    #[error("negative undershoot {min:e} below {limit:e}")]
    Undershoot { min: f64, limit: f64 },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("denominator underflow: |X-Y|^2 = {dist2} at h = {h}")]
    Underflow { dist2: f64, h: f64 },
    #[error("insufficient sampling: {0}")]
    InsufficientSampling(String),
    #[error("slope fit needs positive values, got {0}")]
    NonPositive(f64),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
