use thiserror::Error;

/// Errors raised by the model constructors and evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("`{field}` must be non-negative (got {value})")]
    Negative { field: &'static str, value: f64 },

    #[error("`{field}` must be finite (got {value})")]
    NonFinite { field: &'static str, value: f64 },

    #[error("transmission must lie in (0, 1] (got {0})")]
    Transmission(f64),

    #[error("matrix is not symmetric (relative deviation {0:e})")]
    NotSymmetric(f64),

    #[error("covariance is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("Fock index out of range: {0}")]
    IndexRange(&'static str),

    #[error("cutoff {cutoff} too small: truncated weight {deficit:e} exceeds {tolerance:e}")]
    CutoffTooSmall { cutoff: usize, deficit: f64, tolerance: f64 },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(&'static str),

    #[error("ill-conditioned geometry: |1/d3 - 1/f_R| * d3 = {0:e} is too close to the Fourier configuration")]
    IllConditionedGeometry(f64),

    #[error("ghost imaging needs f_R != d3; use ghost diffraction for the Fourier configuration")]
    FourierBranch,

    #[error("ghost diffraction needs f_R = d3")]
    ImagingBranch,

    #[error("ghost diffraction needs the Fourier-lens test arm; the choice (a) would not give any meaningful result")]
    ObjectPlaneDiffraction,

    #[error("kernel profile is not symmetric under q -> -q (mismatch at q = {0})")]
    AsymmetricProfile(f64),

    #[error("q = {0} is not a sample of the profile grid")]
    ModeNotOnGrid(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),

    #[error("invalid object: {0}")]
    InvalidObject(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn non_negative(field: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        Err(Error::NonFinite { field, value })
    } else if value < 0.0 {
        Err(Error::Negative { field, value })
    } else {
        Ok(value)
    }
}

pub(crate) fn finite(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { field, value })
    }
}
