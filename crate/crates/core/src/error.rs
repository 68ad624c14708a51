use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QsdError {
    #[error("invalid cutoff {0}: at least two Fock levels per mode are required")]
    InvalidCutoff(usize),

    #[error("cutoff mismatch: {left} vs {right} Fock levels")]
    CutoffMismatch { left: usize, right: usize },

    #[error("cutoff of {current} levels is too small: tail mass {tail:.3e} exceeds {tolerance:.1e}, need n_max >= {required}")]
    CutoffTooSmall {
        current: usize,
        required: usize,
        tail: f64,
        tolerance: f64,
    },

    #[error("shape mismatch: expected dimension {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("mode {mode} out of range for a {modes}-mode state")]
    ModeOutOfRange { mode: usize, modes: usize },

    #[error("modes must be distinct (got {0} twice)")]
    DuplicateMode(usize),

    #[error("partial trace must keep at least one mode")]
    EmptyKeepSet,

    #[error("invalid POVM element: {0}")]
    InvalidPovm(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state has zero norm and cannot be normalized")]
    ZeroNorm,

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("outcome is impossible for this configuration (probability {0:.3e})")]
    ImpossibleOutcome(f64),

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid phase-space grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, QsdError>;
