use thiserror::Error;

/// Errors raised by the numerical library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Area inputs at (or within 1e-9 of) pi, where the tangent parameterization breaks down.
    #[error("bifurcation point: {name} = {value} is within 1e-9 of pi")]
    Bifurcation { name: &'static str, value: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("aliasing: {fraction:.3e} of spectral energy lies outside the grid")]
    Aliasing { fraction: f64 },

    #[error("quadrature did not converge: estimate {estimate:.3e} exceeds tolerance {tol:.3e}")]
    QuadratureNonConvergence { estimate: f64, tol: f64 },

    #[error("ODE step size underflow at h = {step:.3e}")]
    StepUnderflow { step: f64 },

    #[error("maximization failed: {0}")]
    Search(String),

    #[error("singular point: {0}")]
    Singular(String),

    #[error("undefined measure: {0}")]
    UndefinedMeasure(String),

    #[error("overflow: {0}")]
    Overflow(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite, got {value}")))
    }
}
