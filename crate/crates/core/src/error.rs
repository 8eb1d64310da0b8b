use thiserror::Error;

/// Errors raised by the simulation and verification layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("coefficient asymmetry {asymmetry:e} exceeds tolerance {tolerance:e}")]
    Asymmetry { asymmetry: f64, tolerance: f64 },

    #[error("coefficients are not Hermitian (asymmetry {0:e})")]
    Symmetry(f64),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("interval error: {0}")]
    Interval(String),

    #[error("extension too small: need 2*pi*m >= {required:.6}, have {available:.6}")]
    ExtensionTooSmall { required: f64, available: f64 },

    #[error("blow-up guard tripped at t = {time}: sup|u| = {sup:e} > {ceiling:e}")]
    BlowupGuard { time: f64, sup: f64, ceiling: f64 },

    #[error("Picard iteration on [{start}, {end}] failed to contract (factor {factor:.4})")]
    NoContraction { start: f64, end: f64, factor: f64 },

    #[error("budget fails at grid resolution starting at t = {time}")]
    DegenerateInterval { time: f64 },

    #[error("operation requires dimension {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("only {points} resolvable tail points, need at least {required}")]
    InsufficientTail { points: usize, required: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
