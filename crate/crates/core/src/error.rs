use thiserror::Error;

/// Errors produced by the numeric kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite sample value at {coords:?}")]
    NonFiniteSample { coords: Vec<f64> },

    #[error("grids do not match ({context})")]
    GridMismatch { context: &'static str },

    #[error("derivative stencil exceeds grid extent on axis {axis}")]
    StencilExceedsGrid { axis: usize },

    #[error("multi-index order {got} exceeds configured maximum {max}")]
    OrderTooLarge { got: usize, max: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("scale values must be >= 1 (min found {min})")]
    ScaleBelowOne { min: f64 },

    #[error("shift {shift:?} needs points outside the box and the scale has no closed form")]
    ShiftNotResampleable { shift: Vec<f64> },

    #[error("scale has no closed form and cannot be resampled off-lattice")]
    ScaleNotResampleable,

    #[error("bump mass {mass} deviates from 1 beyond tolerance")]
    BumpMassInvalid { mass: f64 },

    #[error("bump support violates the stated box (nonzero value at {coords:?})")]
    BumpSupportViolation { coords: Vec<f64> },

    #[error("bump must be nonnegative (found {value} at {coords:?})")]
    BumpNegative { value: f64, coords: Vec<f64> },

    #[error("missing or failed derivative-bound certificate for the scale")]
    MissingDerivativeCertificate,

    #[error("profile domain exceeded at argument {value}")]
    ProfileDomainExceeded { value: f64 },

    #[error("lambda selection failed at n = {n} (offset cap {t_cap} exhausted)")]
    LambdaSelectionFailed { n: usize, t_cap: u32 },

    #[error("decay report inconsistent at (d = {d}, gamma = {gamma:?}); input fails the rapid-vanishing proxy")]
    DecayInconsistent { d: u32, gamma: Vec<usize> },

    #[error("numeric cap exhausted: {0}")]
    CapExhausted(String),

    #[error("residual {residual} exceeded the certified budget {budget}")]
    BudgetExceeded { residual: f64, budget: f64 },

    #[error("group windows do not match")]
    WindowMismatch,

    #[error("group derivatives are undefined on a discrete window")]
    GroupDerivativeOnDiscrete,

    #[error("group window too small for support level {level}")]
    WindowTooSmall { level: usize },

    #[error("translation by {amount} is not aligned with the lattice spacing {spacing}")]
    NotLatticeAligned { amount: f64, spacing: f64 },

    #[error("module seminorm diverged: {0}")]
    SeminormDiverged(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
