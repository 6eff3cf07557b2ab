use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("lattice mismatch: left n_max = {left}, right n_max = {right}")]
    LatticeMismatch { left: usize, right: usize },

    #[error("non-finite coefficient at mode {mode}")]
    NonFinite { mode: i64 },

    #[error("symmetry violation: {0}")]
    Symmetry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid of {got} points is too small, need at least {need}")]
    GridTooSmall { got: usize, need: usize },

    #[error("integration failed at step {step} (t = {time})")]
    Integration { step: usize, time: f64 },

    #[error("no nonlinear part: the nonlinear remainder is identically zero")]
    NoNonlinearPart,

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("numerical failure in trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<LabError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::InvalidParameter(msg.into()))
}

impl LabError {
    /// Process exit status: 2 for bad input, 3 for numerical failure, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::UnknownExperiment(_)
            | LabError::Config(_)
            | LabError::InvalidParameter(_)
            | LabError::Symmetry(_)
            | LabError::LatticeMismatch { .. }
            | LabError::GridTooSmall { .. } => 2,
            LabError::NonFinite { .. }
            | LabError::Integration { .. }
            | LabError::NoNonlinearPart
            | LabError::Trial { .. } => 3,
            LabError::Io(_) | LabError::Json(_) => 1,
        }
    }
}
