use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grid has {points} points; a power of two >= 8 is required")]
    NotPowerOfTwo { points: usize },

    #[error("grid spacing {spacing:.3e} is coarser than 1/(4n) = {limit:.3e} for n = {n}")]
    GridTooCoarse { spacing: f64, limit: f64, n: usize },

    #[error("Mittag-Leffler series for alpha = {alpha}, z = {z} is outside the supported domain: {reason}")]
    MittagLefflerDomain { alpha: f64, z: f64, reason: String },

    #[error("step-size guard violated: {value:.3e} > {limit}")]
    StepSizeGuard { value: f64, limit: f64 },

    #[error("solver unstable at step {step}: field norm {norm:.3e} exceeded growth limit")]
    Unstable { step: usize, norm: f64 },

    #[error("slope fit needs at least 4 positive points: {reason}")]
    SlopeFit { reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
