use thiserror::Error;

/// Errors raised by the simulator and analysis pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field specification: {0}")]
    InvalidSpec(String),

    #[error("field support exceeds the grid: {0}")]
    SupportExceedsGrid(String),

    #[error("feature is not resolved by the grid: {0}")]
    Unresolved(String),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("point {value} is off the grid (nearest sample is {distance} away)")]
    OffGrid { value: f64, distance: f64 },

    #[error("propagation would alias: {0}")]
    Aliasing(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("wavevector {k} rad/m is beyond the grid Nyquist limit {limit} rad/m")]
    BeyondNyquist { k: f64, limit: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("tilt angle {theta} rad is out of range")]
    TiltOutOfRange { theta: f64 },

    #[error("numerical aperture exceeded: |sin theta| = {sin_theta} > {limit}")]
    NumericalAperture { sin_theta: f64, limit: f64 },

    #[error("grid is not symmetric about the origin: {0}")]
    AsymmetricGrid(String),

    #[error("invalid array shape: {0}")]
    Shape(String),

    #[error("invalid detector model: {0}")]
    InvalidDetector(String),

    #[error("invalid interferometer configuration: {0}")]
    InvalidInterferometer(String),

    #[error("invalid scan configuration: {0}")]
    InvalidScan(String),

    #[error("negative mean count {0} (unphysical forward model)")]
    NegativeMean(f64),

    #[error("{0}")]
    Reconstruction(String),

    #[error("feature not available for this field kind: {0}")]
    FeatureAbsent(String),

    #[error("axis mismatch: {0}")]
    AxisMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
