use thiserror::Error;

#[derive(Debug, Error)]
pub enum KitError {
    #[error("argument error: {0}")]
    Argument(String),
    #[error("structure error: {0}")]
    Structure(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, KitError>;
