use thiserror::Error;

use crate::diagnostics::DiagnosticsRecord;

pub type Result<T> = std::result::Result<T, KbkError>;

#[derive(Debug, Error)]
pub enum KbkError {
    #[error("grid size must be a power of two >= 8, got {0}")]
    InvalidGridSize(usize),

    #[error("domain scale L must be positive and finite, got {0}")]
    InvalidDomainScale(f64),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("unsupported derivative order {0} (supported: 1..=4)")]
    UnsupportedOrder(u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("soliton fit failed: {0}")]
    FitFailure(String),

    #[error("non-finite values at step {step} (t = {time})")]
    BlowUp {
        step: usize,
        time: f64,
        last_finite: Box<Option<DiagnosticsRecord>>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl KbkError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        KbkError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(KbkError::LengthMismatch { expected, actual })
    }
}
