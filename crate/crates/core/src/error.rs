use thiserror::Error;

/// Errors produced by the decoding toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("code distance must be at least 2, got {0}")]
    InvalidDistance(usize),

    #[error("size mismatch: expected {expected} qubits, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("residual frame has a nonzero syndrome; the correction did not return to the code space")]
    NonzeroSyndrome,

    #[error("single fault at location {location} produced {count} detection events in one basis")]
    TooManyEvents { location: usize, count: usize },

    #[error("single fault at location {location} flips a logical observable without any detection event")]
    UndetectableFault { location: usize },

    #[error("detector edge ({a}, {b}) has sources with disagreeing logical parity")]
    LogicalParityConflict { a: u32, b: u32 },

    #[error("perfect matching needs an even node count, got {0}")]
    OddNodeCount(usize),

    #[error("brute-force matching supports at most {max} nodes, got {got}")]
    TooManyNodes { max: usize, got: usize },

    #[error("weight matrix is not square/symmetric or contains invalid weights")]
    InvalidWeights,

    #[error("vertex {0} is not a detector of this graph")]
    UnknownVertex(u32),

    #[error("no perfect matching exists for this syndrome")]
    NoPerfectMatching,

    #[error("matched edge {0} carries no error sources")]
    EmptySourceList(u32),

    #[error("{what} is only defined for even code distance, got {distance}")]
    OddDistance { what: &'static str, distance: usize },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
