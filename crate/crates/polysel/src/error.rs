use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("conditioning `{conditioning}` has {accepted} accepted draws, at least {required} are required")]
    InsufficientData {
        conditioning: String,
        accepted: usize,
        required: usize,
    },

    #[error("boundary-flagged fits persisted through {0} redraws")]
    RedrawLimit(usize),

    #[error(transparent)]
    Core(#[from] polysel_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}
