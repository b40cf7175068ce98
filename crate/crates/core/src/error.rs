use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("displacement is the identity; no unique screw axis")]
    IdentityDisplacement,
    #[error("invalid pose: {0}")]
    InvalidPose(String),
    #[error("invalid screw: {0}")]
    InvalidScrew(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("degenerate neighborhood around point {0}")]
    DegenerateNeighborhood(usize),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),

    #[error("linear program dimensions disagree: {0}")]
    DimensionMismatch(String),
    #[error("simplex pivot broke down: {0}")]
    NumericalBreakdown(String),
    #[error("grasp metric is unbounded: environment contacts alone can drive the task motion")]
    ModelUnbounded,
    #[error("invalid task context: {0}")]
    InvalidContext(String),
    #[error("pivot axis is {distance:.4} m from the nearest bounding-box edge")]
    AxisNotOnBody { distance: f64 },

    #[error("empty input")]
    EmptyInput,
    #[error("{0} segments exceed the brute-force enumeration limit of 16")]
    TooManySegments(usize),
    #[error("no antipodal pair lies inside the group intersection")]
    NoFeasiblePair,

    #[error("bad edge selector {0}")]
    BadEdgeSelector(String),
    #[error("primitive {0} has zero magnitude")]
    ZeroMagnitude(usize),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("unsupported schema version {0}")]
    UnsupportedSchema(u32),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            Parse { .. } | Json(_) | InvalidPlan(_) | UnsupportedSchema(_) | InvalidPose(_) | BadEdgeSelector(_) | ZeroMagnitude(_) | Io { .. } => 2,
            IdentityDisplacement
            | InvalidScrew(_)
            | EmptyCloud
            | DegenerateNeighborhood(_)
            | DegenerateGeometry(_)
            | InvalidCloud(_)
            | AxisNotOnBody { .. }
            | InvalidContext(_) => 3,
            NoFeasiblePair => 4,
            DimensionMismatch(_) | NumericalBreakdown(_) | ModelUnbounded | EmptyInput | TooManySegments(_) => 5,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { context: context.into(), source }
    }
}
