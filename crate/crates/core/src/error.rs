use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("grid resolution: {0}")]
    Resolution(String),
    #[error("operation requires {expected} mode")]
    ModeMismatch { expected: &'static str },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("kernel under-resolved: radius {radius:.3e} < 2 cells ({spacing:.3e}) along {axis}")]
    UnderResolvedKernel {
        axis: char,
        radius: f64,
        spacing: f64,
    },
    #[error("region mismatch: {0}")]
    RegionMismatch(String),
    #[error("support violation: {0}")]
    SupportViolation(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("inadmissible exponent pair ({alpha}, {beta})")]
    Inadmissible { alpha: f64, beta: f64 },
    #[error("column constraint violated: max |div of column mean| = {magnitude:.3e}")]
    ColumnConstraint { magnitude: f64 },
    #[error("inconsistent data: {0}")]
    InconsistentData(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("slip condition violated: |U.N| = {magnitude:.3e} at {point:?}")]
    SlipViolation { magnitude: f64, point: [f64; 3] },
    #[error("stability limit exceeded at step {step}: {detail}")]
    Stability { step: usize, detail: String },
    #[error("non-finite value at step {step}")]
    NonFinite { step: usize },
    #[error("energy inequality violated at step {step}: excess {excess:.3e}")]
    EnergyInequality { step: usize, excess: f64 },
    #[error("boundary layer unresolved: sqrt(nu T) = {layer:.3e} < 4 hz = {limit:.3e}")]
    UnresolvedBoundaryLayer { layer: f64, limit: f64 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("bad field container: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Failures of the numerics themselves, as opposed to bad input.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            Error::Stability { .. }
                | Error::NonFinite { .. }
                | Error::EnergyInequality { .. }
                | Error::Quadrature(_)
        )
    }
}
