use thiserror::Error;

/// Errors raised by the fitting routines and the data/model I/O layer.
#[derive(Debug, Error)]
pub enum GocreError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate component: {0}")]
    DegenerateComponent(String),

    #[error("column not found: {0}")]
    MissingColumn(String),

    #[error("parse error at row {row}, column {column}: cannot read {value:?} as a number")]
    Parse {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("unsupported model file version {found} (this build reads version {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, GocreError>;

pub(crate) fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(GocreError::InvalidArgument(format!(
            "{what} contains a non-finite value at position {pos}"
        )));
    }
    Ok(())
}
