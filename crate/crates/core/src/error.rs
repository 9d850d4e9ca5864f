use thiserror::Error;

use crate::graph::Triangle;
use crate::provers::QuerySymbol;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self loop at vertex {0}")]
    SelfLoop(usize),
    #[error("lattice needs at least one row and one column")]
    EmptyLattice,
    #[error("no triangle cover: vertices {0:?} lie in no triangle")]
    Uncoverable(Vec<usize>),
    #[error("{0:?} is not a triangle of the graph")]
    NotATriangle(Triangle),
    #[error("designated neighbour {neighbor} is not adjacent to vertex {vertex}")]
    NotANeighbor { vertex: usize, neighbor: usize },
    #[error("expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("graph spec: {0}")]
    Spec(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("{qubits} qubits exceeds the configured cap of {cap}")]
    QubitCap { qubits: usize, cap: usize },
    #[error("total dimension {dim} exceeds the configured cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("site {site} out of range for {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },
    #[error("state not normalised: squared norm {0}")]
    NotNormalized(f64),
    #[error("observable is not a Hermitian involution (residual {0:e})")]
    NotAnInvolution(f64),
    #[error("expectation has non-negligible imaginary part {0:e}")]
    ImaginaryExpectation(f64),
    #[error("projection onto an empty branch (norm {0:e})")]
    EmptyBranch(f64),
    #[error("control site must be two-dimensional, found dimension {0}")]
    ControlDimension(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProverError {
    #[error("prover {0} was already queried in this session")]
    AlreadyQueried(usize),
    #[error("prover {vertex} out of range for {n} provers")]
    UnknownProver { vertex: usize, n: usize },
    #[error("strategy has no observable for ({vertex}, {symbol:?})")]
    MissingObservable { vertex: usize, symbol: QuerySymbol },
    #[error("noise probability {0} outside [0, 1]")]
    InvalidNoise(f64),
    #[error("classical assignment covers {found} provers, expected {expected}")]
    AssignmentSize { expected: usize, found: usize },
    #[error("exhaustive search over {bits} assignment bits exceeds the cap of {cap}")]
    SearchCap { bits: usize, cap: usize },
    #[error("strategy spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PatternError {
    #[error("pattern basis for vertex {vertex} is Identity on prefix {prefix:?}")]
    IdentityBasis { vertex: usize, prefix: Vec<(usize, i8)> },
    #[error("basis for vertex {vertex} depends on unmeasured vertex {dependency}")]
    UnmeasuredDependency { vertex: usize, dependency: usize },
    #[error("session already has queried provers; patterns need a fresh session")]
    SessionReused,
    #[error("invalid pattern: {0}")]
    Invalid(String),
    #[error("pattern spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Prover(#[from] ProverError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("gap must be positive, got {0}")]
    NonPositiveGap(f64),
    #[error("confidence must lie in (0, 1), got {0}")]
    InvalidConfidence(f64),
    #[error("required trial count exceeds the cap of {cap}")]
    TrialCap { cap: u64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Prover(#[from] ProverError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}
