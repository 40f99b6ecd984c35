use thiserror::Error;

/// Errors surfaced by map construction, distance queries, samplers, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid walk increment at position {0}: expected one of a, b, c")]
    InvalidStep(usize),

    #[error("lazy-walk increment out of {{-1,0,1}} at position {0}")]
    InvalidLazyIncrement(usize),

    #[error("map is not acyclic: directed cycle through edges {0:?}")]
    CycleDetected(Vec<usize>),

    #[error("map validation failed: {0}")]
    InvalidMap(String),

    #[error("inverse encoding requires a bipolar map with no missing edges: {0}")]
    NotBipolar(String),

    #[error("vertex {0} is out of range")]
    NoSuchVertex(usize),

    #[error("edge {0} is out of range")]
    NoSuchEdge(usize),

    #[error("no directed path from {src} to {dst}")]
    Unreachable { src: usize, dst: usize },

    #[error("geodesics did not coalesce within the window")]
    NotCoalesced,

    #[error("window did not stabilize below the maximum size {max_window}")]
    NotStabilized { max_window: usize },

    #[error("censoring rate {rate:.4} exceeds the configured threshold {threshold:.4}")]
    CensoringThreshold { rate: f64, threshold: f64 },

    #[error("enumeration cap exceeded: {0}")]
    CapExceeded(String),

    #[error("rejection budget exhausted after {0} attempts")]
    BudgetExhausted(usize),

    #[error("no admissible walk for the requested boundary data")]
    EmptyFamily,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parse error in {what}: {detail}")]
    Parse { what: String, detail: String },

    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
