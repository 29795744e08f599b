use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrappaError {
    #[error("malformed rational {0:?}")]
    MalformedRational(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("dangling endpoint: {item} references missing vertex {vertex:?}")]
    DanglingEndpoint { item: String, vertex: String },
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("invalid id {0:?}")]
    InvalidId(String),
    #[error("disconnected graph")]
    Disconnected,
    #[error("empty graph")]
    Empty,
    #[error("non-positive length on edge {0:?}")]
    NonPositiveLength(String),
    #[error("unknown id {0:?}")]
    UnknownId(String),
    #[error("bad point syntax {0:?}")]
    BadPoint(String),
    #[error("point {0:?} lies outside its edge")]
    PointOutOfRange(String),
    #[error("not degree zero (degree {0})")]
    NotDegreeZero(String),
    #[error("not mass zero (mass {0})")]
    NotMassZero(String),
    #[error("weight {n} exceeds depth {depth}")]
    DepthExceeded { n: usize, depth: usize },
    #[error("graph is not semistable")]
    NotSemistable,
    #[error("graph is not stable")]
    NotStable,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid subgraph: {0}")]
    InvalidSubgraph(String),
    #[error("expected exactly one half-edge, found {0}")]
    HalfEdgeCount(usize),
    #[error("graph is not a {0}")]
    WrongShape(&'static str),
    #[error("points must be distinct")]
    SamePoint,
    #[error("path is not composable at position {0}")]
    NotComposable(usize),
    #[error("linear system has no unique solution: {0}")]
    Singular(String),
}

pub type Result<T> = std::result::Result<T, GrappaError>;
