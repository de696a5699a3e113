use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TurError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: String, reason: String },

    #[error("Liouvillian kernel is degenerate (second eigenvalue {second:.3e})")]
    DegenerateKernel { second: f64 },

    #[error("eigenvalue iteration did not converge after {iterations} sweeps")]
    EigenSolverFailure { iterations: usize },

    #[error("dominant eigenvalue is not unique at chi = {chi} (real-part gap {gap:.3e})")]
    DegenerateDominantRoot { chi: f64, gap: f64 },

    #[error("finite-difference step {step} is too small for this precision")]
    StepTooSmall { step: f64 },

    #[error("characteristic-polynomial coefficient c1 vanishes (|c1| = {c1:.3e})")]
    ZeroC1 { c1: f64 },

    #[error(
        "engine does not operate: current {current:.3e} is below the degeneracy floor {floor:.3e}"
    )]
    DegenerateOperation { current: f64, floor: f64 },

    #[error("trajectory horizon {horizon} is too short for relaxation time {relaxation}")]
    InsufficientHorizon { horizon: f64, relaxation: f64 },

    #[error("i/o failure: {0}")]
    Io(String),
}

impl TurError {
    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        TurError::InvalidParams {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    /// True for failures that describe the physics (engine not running,
    /// kernel not unique) rather than the numerics.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            TurError::DegenerateKernel { .. } | TurError::DegenerateOperation { .. }
        )
    }

    /// Short machine-readable tag used in CSV `status` columns.
    pub fn tag(&self) -> &'static str {
        match self {
            TurError::InvalidParams { .. } => "invalid-params",
            TurError::DegenerateKernel { .. } => "degenerate-kernel",
            TurError::EigenSolverFailure { .. } => "eigen-solver-failure",
            TurError::DegenerateDominantRoot { .. } => "degenerate-dominant-root",
            TurError::StepTooSmall { .. } => "step-too-small",
            TurError::ZeroC1 { .. } => "zero-c1",
            TurError::DegenerateOperation { .. } => "degenerate-operation",
            TurError::InsufficientHorizon { .. } => "insufficient-horizon",
            TurError::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for TurError {
    fn from(e: std::io::Error) -> Self {
        TurError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, TurError>;
