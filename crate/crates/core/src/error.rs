use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("symbol {symbol} out of range for alphabet of size {dim_o}")]
    SymbolOutOfRange { symbol: usize, dim_o: usize },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("probability underflow ({prob:e}): symbol is impossible under the model")]
    Underflow { prob: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("Cayley step failed: {0}")]
    StepFailure(String),

    #[error("training aborted at epoch {epoch}, batch {batch}: {reason}")]
    TrainingAborted {
        epoch: usize,
        batch: usize,
        reason: String,
        /// Losses recorded before the abort.
        partial_losses: Vec<f64>,
    },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}:{line}: symbol {symbol} out of range for dimO={dim_o}")]
    SymbolRange {
        path: PathBuf,
        line: usize,
        symbol: usize,
        dim_o: usize,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Underflow { .. } | Error::StepFailure(_) | Error::TrainingAborted { .. }
        )
    }
}
