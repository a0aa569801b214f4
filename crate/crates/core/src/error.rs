use thiserror::Error;

/// Errors surfaced by the synthesis and verification pipeline.
#[derive(Debug, Error)]
pub enum SchurError {
    /// A supplied irrep basis does not stay inside its own span under the
    /// u(d) generators.
    #[error("REALIZATION_NOT_INVARIANT: generator action leaves the basis span (residual {residual:.3e})")]
    RealizationNotInvariant { residual: f64 },

    /// A Schur label lies outside the register described by its layout.
    #[error("LABEL_OUT_OF_RANGE: {reason}")]
    LabelOutOfRange { reason: String },

    /// A matrix handed to the eliminator fails the unitarity tolerance.
    #[error("NOT_UNITARY: max residual of U^H U - I is {residual:.3e}")]
    NotUnitary { residual: f64 },

    /// An expansion would exceed the configured index-space cap.
    #[error("SPACE_CAP_EXCEEDED: required index space {required} exceeds cap {cap}")]
    SpaceCapExceeded { required: u128, cap: u128 },

    /// A gate-stream file failed to parse.
    #[error("malformed gate stream: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SchurError>;
