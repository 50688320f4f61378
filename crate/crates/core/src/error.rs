use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("non-finite {what}")]
    NonFinite { what: &'static str },
    #[error("unknown model kind `{0}` (expected open, pt-balanced or pt-lossy)")]
    UnknownKind(String),
    #[error("negative {what}")]
    NegativeWidth { what: &'static str },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EpError {
    #[error("no closed-form thresholds for this family: {0}")]
    UnsupportedFamily(&'static str),
    #[error("invalid search interval [{min}, {max}]")]
    InvalidInterval { min: f64, max: f64 },
    #[error("grid too small: {got} points, need at least {need}")]
    GridTooSmall { got: usize, need: usize },
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("json encoding failed: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed table at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
