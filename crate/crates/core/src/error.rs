use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid source set: {0}")]
    InvalidSource(String),

    #[error("epsilon {0} outside the open interval (0, 2/9)")]
    InvalidEpsilon(f64),

    #[error("sources {a} and {b} are {distance:.3e} apart, too close for patch radius {radius:.3e}")]
    SourcesTooClose {
        a: usize,
        b: usize,
        distance: f64,
        radius: f64,
    },

    #[error("invalid grid configuration: {0}")]
    GridConfig(String),

    #[error("log weight {value:.3e} at node {node} exceeds cap {cap:.3e}; refine the grid near the sources")]
    WeightOverflow { node: usize, value: f64, cap: f64 },

    #[error("degenerate weight field: {0}")]
    DegenerateField(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("annuli outside the grid: {0}")]
    AnnuliOutsideGrid(String),

    #[error("radius {radius:.3e} below the local grid resolution {resolution:.3e}")]
    BelowResolution { radius: f64, resolution: f64 },

    #[error("configuration error at {path}: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
