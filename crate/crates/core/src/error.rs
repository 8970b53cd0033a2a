use std::path::PathBuf;

/// Errors produced by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("zero-norm vector")]
    ZeroNorm,

    #[error("non-finite value in vector")]
    NonFinite,

    #[error("vectors from different providers: `{left}` vs `{right}`")]
    ProviderMismatch { left: String, right: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown text: {0:?}")]
    UnknownText(String),

    #[error("transport failure after {attempts} attempts: {message}")]
    Transport { attempts: u32, message: String },

    #[error("malformed provider response: {0}")]
    Protocol(String),

    #[error("script exhausted for template `{0}`")]
    ScriptExhausted(String),

    #[error("missing placeholder `{placeholder}` in template `{template}`")]
    MissingPlaceholder { template: String, placeholder: String },

    #[error("temperature {0} rejected: generation pipelines run at temperature 0")]
    NonZeroTemperature(f64),

    #[error("intent `{0}` has no negated names")]
    MissingNegatedName(String),

    #[error("class `{0}` absent from the training set")]
    ClassAbsent(String),

    #[error("missing metric `{metric}` in report `{model}`")]
    MissingMetric { model: String, metric: String },

    #[error("non-finite loss term at example `{0}`")]
    NonFiniteLoss(String),

    #[error("gradient check failed at step {step}: relative error {rel_err:e}")]
    GradientCheck { step: usize, rel_err: f64 },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
