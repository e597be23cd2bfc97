use thiserror::Error;

/// Errors raised by the solver and its supporting layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("minimization bracket [{lo}, {hi}] could not be refined: {reason}")]
    BracketFailure { lo: f64, hi: f64, reason: String },

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("grid mismatch: ({n_left}, {len_left}) vs ({n_right}, {len_right})")]
    GridMismatch {
        n_left: usize,
        len_left: f64,
        n_right: usize,
        len_right: f64,
    },

    #[error("imaginary residue {residue:e} exceeds tolerance {tol:e}")]
    ImaginaryResidue { residue: f64, tol: f64 },

    #[error("relative residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("zero-frequency mode {magnitude:e} exceeds tolerance {tol:e}")]
    ZeroModePresent { magnitude: f64, tol: f64 },

    #[error("iterate norm {norm:e} lies outside the ball of radius {rho}")]
    BallViolation { norm: f64, rho: f64 },

    #[error("epsilon {epsilon} exceeds the admissible maximum {epsilon_max}")]
    Admissibility { epsilon: f64, epsilon_max: f64 },

    #[error("fixed-point iteration did not converge in {iterations} steps (last increment {last_increment:e})")]
    MaxItersExceeded {
        iterations: usize,
        last_increment: f64,
    },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code for this error class.
    ///
    /// 2 validation, 3 admissibility, 4 convergence, 5 numerical integrity.
    /// I/O failures share the validation code.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation { .. }
            | Error::DegenerateModel(_)
            | Error::Parse(_)
            | Error::GridMismatch { .. }
            | Error::Io(_) => 2,
            Error::Admissibility { .. } | Error::BallViolation { .. } => 3,
            Error::MaxItersExceeded { .. } | Error::BracketFailure { .. } => 4,
            Error::ImaginaryResidue { .. }
            | Error::ZeroModePresent { .. }
            | Error::ResidualTooLarge { .. } => 5,
        }
    }

    /// Short machine-readable tag used in error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation { .. } => "validation",
            Error::BracketFailure { .. } => "bracket_failure",
            Error::DegenerateModel(_) => "degenerate_model",
            Error::GridMismatch { .. } => "grid_mismatch",
            Error::ImaginaryResidue { .. } => "imaginary_residue",
            Error::ZeroModePresent { .. } => "zero_mode_present",
            Error::ResidualTooLarge { .. } => "residual_too_large",
            Error::BallViolation { .. } => "ball_violation",
            Error::Admissibility { .. } => "admissibility",
            Error::MaxItersExceeded { .. } => "max_iters_exceeded",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
