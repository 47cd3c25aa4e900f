use thiserror::Error;

/// Errors raised by the numerical pipeline.
///
/// Validation problems with a [`SystemSpec`](crate::system::SystemSpec) are
/// not errors: they are collected in a
/// [`ValidationReport`](crate::system::ValidationReport). The variants below
/// are for operations that cannot produce a meaningful result.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a_{{0,1}} must be nonzero (lambda is undefined)")]
    ZeroA01,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported branch: |alpha(I)| = {alpha} >= 1 at I = {action}")]
    UnsupportedBranch { action: f64, alpha: f64 },

    #[error("crest root finder failed at phi = {phi} (I = {action}): {reason}")]
    CrestFailure {
        action: f64,
        phi: f64,
        reason: String,
    },

    #[error("no crest crossing in the search window for (I, phi, s) = ({action}, {phi}, {s})")]
    NoCrossing { action: f64, phi: f64, s: f64 },

    #[error("point (I, phi, s) = ({action}, {phi}, {s}) is outside the domain H")]
    OutsideDomain { action: f64, phi: f64, s: f64 },

    #[error("quadrature did not converge: estimated error {achieved:e} > requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("root finder: {0}")]
    Root(String),

    #[error("level E = {level} is below the minimum {minimum} of the torus function")]
    EmptyLevelSet { level: f64, minimum: f64 },

    #[error("invalid resonance ({k0}, {l0}): {reason}")]
    Resonance { k0: u32, l0: u32, reason: String },

    #[error("chain gap between levels {from} and {to}: {reason}")]
    ChainGap { from: f64, to: f64, reason: String },

    #[error("chain construction failed: {0}")]
    Chain(String),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("orbit did not approach the invariant manifold within T = {t_max}: {reason}")]
    NoApproach { t_max: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
