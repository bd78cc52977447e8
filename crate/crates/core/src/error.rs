use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("a flow graph needs at least one node")]
    EmptyGraph,
    #[error("node {node} is out of range for a graph with {node_count} nodes")]
    InvalidNode { node: usize, node_count: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("flow graph is not connected")]
    Disconnected,
    #[error("operation is only defined on the path 1-2-..-n")]
    NotAPath,
    #[error("node {0} has no neighbors, its conflict state is undefined")]
    IsolatedNode(usize),
    #[error("color {color} is outside the palette 1..={palette}")]
    ColorOutOfRange { color: u32, palette: u32 },
    #[error("palette size must be at least {min}, got {got}")]
    PaletteTooSmall { min: u32, got: u32 },
    #[error("color state has {got} entries but the graph has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("path length {got} is below the minimum of {min} for this operation")]
    PathTooShort { min: usize, got: usize },
    #[error("local view of depth {0} cannot be decided by a one-round rule")]
    ViewDepth(usize),
    #[error("root degree {0} is not handled by path protocols")]
    UnsupportedDegree(usize),
    #[error("radius {r} must be below the graph diameter {diameter}")]
    RadiusTooLarge { r: usize, diameter: usize },
    #[error("radius must be at least 1")]
    ZeroRadius,
    #[error("nodes {0} and {1} are not adjacent")]
    NotAdjacent(usize, usize),
    #[error("enumeration needs {required} evaluations, budget is {budget}; use Monte Carlo")]
    BudgetExceeded { required: u128, budget: u128 },
    #[error("exact accumulator overflowed; lower n or c")]
    Overflow,
    #[error("unknown protocol `{0}`")]
    UnknownProtocol(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("trial count must be positive")]
    NoTrials,
}
