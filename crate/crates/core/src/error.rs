use std::path::PathBuf;

use crate::channel::{CallId, ChannelId};
use crate::topology::CellId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("unknown cell {0}")]
    UnknownCell(CellId),

    #[error("unknown call {0}")]
    UnknownCall(CallId),

    #[error("call {0} is already active")]
    DuplicateCall(CallId),

    #[error("cell {0} still has free native channels; borrowing is only triggered by overload")]
    NotSaturated(CellId),

    #[error("user position ({x:.1}, {y:.1}) lies outside cell {cell}")]
    PositionOutsideCell { cell: CellId, x: f64, y: f64 },

    #[error("stale borrow plan: {0}")]
    StalePlan(String),

    #[error("channel {channel} is not held by cell {cell}")]
    ChannelNotHeld { cell: CellId, channel: ChannelId },

    #[error("SINR denominator is zero (no noise and no interference)")]
    ZeroDenominator,

    #[error("Monte-Carlo estimate needs at least {min} samples, got {got}")]
    TooFewSamples { min: u64, got: u64 },

    #[error("scenario premise failed: {0}")]
    Premise(String),

    #[error("config {path}: {message}")]
    ConfigParse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
