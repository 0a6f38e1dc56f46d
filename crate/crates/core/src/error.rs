use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),

    #[error("polygon vertices must be listed counterclockwise (signed area {0})")]
    NotCounterClockwise(f64),

    #[error("polygon boundary self-intersects: edges {0} and {1}")]
    SelfIntersecting(usize, usize),

    #[error("degenerate vertex: inner angle {0} is 0 or pi")]
    DegenerateVertex(f64),

    #[error("degenerate angle {0}: must lie in (0, pi) or (pi, 2pi)")]
    DegenerateAngle(f64),

    #[error("sensing direction has sin(theta) = 0; orientation undefined")]
    UndefinedOrientation,

    #[error("expected detector count must be positive, got {0}")]
    NonPositiveExpectation(f64),

    #[error("class has no members")]
    EmptyClass,

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("no feasible arrangement: {0}")]
    NoFeasibleArrangement(String),

    #[error("assembly search space too large: {0} edges (limit {1})")]
    SearchSpaceTooLarge(usize, usize),

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
