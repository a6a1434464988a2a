//! Error type shared by all modules.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received a value violating an invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation needs a quantity that the parameter set does not carry.
    #[error("missing parameter: {0} is not set")]
    MissingParameter(&'static str),

    /// No cooling steady state exists (e.g. detailed balance with A- <= A+).
    #[error("heating regime: {0}")]
    HeatingRegime(String),

    /// A measured sideband asymmetry exceeds the detailed-balance bound.
    #[error("non-physical sideband ratio: {0}")]
    NonPhysicalRatio(String),

    /// Unbounded optimal power for vanishing phase noise.
    #[error("zero phase noise: optimal power is unbounded")]
    ZeroPhaseNoise,

    /// Iterative fit failed to converge.
    #[error("fit did not converge: {0}")]
    NoConvergence(String),

    /// Fit window carries no usable signal.
    #[error("degenerate window: {0}")]
    DegenerateWindow(String),

    /// Fitted mode energy below the zero-point energy.
    #[error("sub-zero-point energy: {0}")]
    SubZeroPoint(String),

    /// Integration step too coarse for the fastest timescale.
    #[error("step size too coarse: {0}")]
    StepSize(String),

    /// Malformed configuration or data file.
    #[error("config: {0}")]
    Config(String),
}
