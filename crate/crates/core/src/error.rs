use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("test function evaluation failed: {0}")]
    Evaluation(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("no path between {from:?} and {to:?} inside the domain")]
    Disconnected { from: [f64; 2], to: [f64; 2] },

    #[error("route of length {length} exceeds eps^-1 |p - q| = {bound}")]
    LrcViolation { length: f64, bound: f64 },

    #[error("no grid node has clearance >= delta/2 = {half_delta} in some component")]
    InfeasibleDelta { half_delta: f64 },

    #[error("topology violation: {0}")]
    TopologyViolation(String),

    #[error("atom at {location:?} is {distance} away from the domain boundary")]
    AtomOffBoundary { location: [f64; 2], distance: f64 },

    #[error("missing constant: {0}")]
    MissingConstants(&'static str),

    #[error("net boundary flux {0} is nonzero but the complement was declared connected")]
    NonzeroNetFlux(f64),

    #[error("support of size {size} exceeds the oracle limit {limit}")]
    SupportTooLarge { size: usize, limit: usize },

    #[error("malformed lifted curve: {0}")]
    MalformedLift(String),

    #[error("trajectory left the grid at {0:?}")]
    LeftGrid([f64; 2]),

    #[error("unknown kind: {0}")]
    UnknownKind(String),
}

impl Error {
    /// Errors that signal invalid user input, as opposed to a failed
    /// geometric or analytic construction.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::InvalidCurve(_)
                | Error::InvalidRegion(_)
                | Error::InvalidInput(_)
                | Error::UnknownKind(_)
                | Error::MissingConstants(_)
        )
    }
}
