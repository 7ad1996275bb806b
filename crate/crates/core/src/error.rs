use thiserror::Error;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Tensor shapes do not line up for the named operation.
    #[error("shape mismatch in {op}: expected {expected}, got {got}")]
    ShapeMismatch {
        op: &'static str,
        expected: String,
        got: String,
    },

    /// A structural setting is invalid (even kernel width, zero rate, ...).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An API contract was violated by the caller (non-scalar loss, missing
    /// gradient, non-binary message bits, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Input is degenerate for the requested computation (e.g. zero variance
    /// under standardization).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A NaN or infinity was produced where finite values are required.
    #[error("non-finite value detected in {0}")]
    NonFinite(String),

    /// A serialized artifact does not follow its format.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;

impl CoreError {
    pub(crate) fn shapes(op: &'static str, expected: impl std::fmt::Debug, got: impl std::fmt::Debug) -> Self {
        CoreError::ShapeMismatch {
            op,
            expected: format!("{expected:?}"),
            got: format!("{got:?}"),
        }
    }
}
