use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot parse rational `{0}`")]
    ParseRat(String),
    #[error("invalid piece: {0}")]
    InvalidPiece(String),
    #[error("total cost is undefined for an array with no filled cells")]
    EmptyArray,
    #[error("array is full")]
    ArrayFull,
    #[error("cell {cell} is outside the array of {capacity} cells")]
    CapacityExceeded { cell: usize, capacity: usize },
    #[error("cell {0} is already filled")]
    CellOccupied(usize),
    #[error("value {0} is outside [0, 1]")]
    ValueOutOfRange(String),
    #[error("adversary exhausted after issuing {0} reals")]
    Exhausted(usize),
    #[error("piece of height {height} is taller than the container height {limit}")]
    TooTall { height: String, limit: String },
    #[error("piece {index} has diameter above the bound {bound}")]
    DiameterTooLarge { index: usize, bound: String },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("unknown {kind} `{name}`")]
    UnknownId { kind: &'static str, name: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
