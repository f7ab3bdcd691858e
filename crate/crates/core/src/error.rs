use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Distinct failure classes for graph validation; each maps to its own code.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("graph has no vertices")]
    Empty,
    #[error("half-edge {half_edge} starts at vertex {vertex}, but there are only {count} vertices")]
    VertexOutOfRange { half_edge: usize, vertex: usize, count: usize },
    #[error("reversal of half-edge {0} is out of range")]
    ReversalOutOfRange(usize),
    #[error("half-edge {0} is its own reversal")]
    ReversalFixedPoint(usize),
    #[error("reversal is not an involution at half-edge {0}")]
    NotInvolution(usize),
    #[error("weight of half-edge {half_edge} is {forward} but its reversal has {backward}")]
    AsymmetricWeight { half_edge: usize, forward: f64, backward: f64 },
    #[error("half-edge {half_edge} has non-positive weight {weight}")]
    NonPositiveWeight { half_edge: usize, weight: f64 },
    #[error("graph is disconnected: vertex {0} is unreachable from vertex 0")]
    Disconnected(usize),
    #[error("edge class table has {got} entries for {expected} half-edges")]
    ClassCount { expected: usize, got: usize },
}

impl GraphError {
    /// Stable numeric code, used as a process exit status by the CLI.
    pub fn code(&self) -> u8 {
        match self {
            GraphError::Empty => 1,
            GraphError::VertexOutOfRange { .. } => 2,
            GraphError::ReversalOutOfRange(_) => 3,
            GraphError::ReversalFixedPoint(_) => 4,
            GraphError::NotInvolution(_) => 5,
            GraphError::AsymmetricWeight { .. } => 6,
            GraphError::NonPositiveWeight { .. } => 7,
            GraphError::Disconnected(_) => 8,
            GraphError::ClassCount { .. } => 9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point is not on the upper sheet (defect {defect:e})")]
    NotOnSheet { defect: f64 },
    #[error("vector is not tangent at its base point (defect {defect:e})")]
    NotTangent { defect: f64 },
    #[error("matrix is not an orientation-preserving isometry (defect {defect:e})")]
    NotIsometry { defect: f64 },
    #[error("{what} = {value} is out of range")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("isometry is not hyperbolic (trace {trace})")]
    NotHyperbolic { trace: f64 },
    #[error("{0} is not realizable in the hyperbolic plane")]
    NotRealizable(&'static str),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid tiling: {0}")]
    Tiling(String),
    #[error("invalid surface: {0}")]
    Surface(String),
    #[error("word refers to generator {letter} but the surface has {count}")]
    UnknownGenerator { letter: i32, count: usize },
    #[error("map is inconsistent with its graph or surface: {0}")]
    Map(String),
    #[error("edge {0} has zero length")]
    DegenerateEdge(usize),
    #[error("vertex {0} has no incident edges")]
    IsolatedVertex(usize),
    #[error("solver did not converge in {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("minimum lies on the bracket boundary at {at}; widen the bracket")]
    BracketTooSmall { at: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
}
