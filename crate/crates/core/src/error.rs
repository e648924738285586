use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("temperature {temperature} K outside the valid band [{min}, {max}] K")]
    OutOfBand { temperature: f64, min: f64, max: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("quadrature did not converge: {coarse:e} vs {refined:e} at tau = {tau:e} s")]
    NotConverged { tau: f64, coarse: f64, refined: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("grid step {step:e} s too coarse for jitter FWHM {jitter:e} s")]
    Resolution { step: f64, jitter: f64 },

    #[error("no half-maximum crossing on the {side} side")]
    NoCrossing { side: Side },

    #[error("measured width {width:e} s outside the attainable range [{min:e}, {max:e}] s")]
    WidthOutOfRange { width: f64, min: f64, max: f64 },

    #[error("insufficient statistics: {0}")]
    InsufficientStatistics(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

pub(crate) fn ensure_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

pub(crate) fn ensure_nonnegative(name: &str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} must be nonnegative and finite, got {value}"
        )))
    }
}
