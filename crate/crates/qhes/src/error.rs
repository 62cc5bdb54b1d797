//! Error taxonomy shared across the crate.

/// Errors surfaced by simulator, circuit, and solver operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Register/layout bookkeeping violations (bad qubit index, unknown group,
    /// pattern length mismatch).
    #[error("layout error: {0}")]
    Layout(String),

    /// Structural validation failures (non-unitary matrix, overlapping
    /// controls and targets, dimension mismatch).
    #[error("validation error: {0}")]
    Validation(String),

    /// Invalid or inconsistent solver/filter/coin parameters.
    #[error("config error: {0}")]
    Config(String),

    /// Counter capacity would be exceeded (freeze window guarantee breaks).
    #[error("capacity error: {0}")]
    Capacity(String),

    /// Statevector or dense-matrix size beyond the configured cap.
    #[error("resource cap exceeded: {0}")]
    Resource(String),

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Text input (Hamiltonian file, config file) could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Post-selection hit a zero-probability branch.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
