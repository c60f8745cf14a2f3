use thiserror::Error;

/// Structural problems that make a ribbon graph file invalid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationKind {
    Loop,
    Disconnected,
    RotationMismatch,
    DuplicateId,
}

impl std::fmt::Display for ValidationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ValidationKind::Loop => "loop",
            ValidationKind::Disconnected => "disconnected",
            ValidationKind::RotationMismatch => "rotation-mismatch",
            ValidationKind::DuplicateId => "duplicate-id",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid graph ({kind}): {detail}")]
    Validation { kind: ValidationKind, detail: String },
    #[error("edge {0} belongs to the spanning tree")]
    EdgeInTree(String),
    #[error("vertex function is missing a value for vertex {0}")]
    MissingVertex(String),
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("found {found} break divisors in one class (expected exactly one)")]
    UniquenessViolation { found: usize },
    #[error("edge {edge} is not incident to vertex {vertex}")]
    NotIncident { vertex: String, edge: String },
    #[error("input is not a break divisor of the graph")]
    NotBreakDivisor,
    #[error("chip is at the sink; no rotor to advance")]
    ChipAtSink,
    #[error("not a simple directed cycle: {0}")]
    NotACycle(String),
    #[error("ribbon graph is not planar (topological genus {0})")]
    NotPlanar(usize),
    #[error("edge {0} is a bridge; its dual would be a loop")]
    HasBridge(String),
    #[error("graph has parallel edges {0} and {1}")]
    NotSimple(String, String),
    #[error("not a spanning tree: {0}")]
    NotATree(String),
    #[error("unknown identifier: {0}")]
    UnknownId(String),
}

impl Error {
    pub(crate) fn invalid(kind: ValidationKind, detail: impl Into<String>) -> Self {
        Error::Validation {
            kind,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
