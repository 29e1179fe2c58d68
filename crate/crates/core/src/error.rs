use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid knots: {0}")]
    InvalidKnots(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("singular least-squares fit (condition estimate {condition:.3e})")]
    SingularFit { condition: f64 },

    #[error("unsupported spline degree {0}")]
    UnsupportedDegree(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("warping function is not monotone: {0}")]
    MonotonicityViolation(String),

    #[error("degenerate curve {0}: zero variance")]
    DegenerateCurve(String),

    #[error("zero-variance input to correlation")]
    ZeroVariance,

    #[error("warped time {0} lies outside [0, 1]")]
    Range(f64),

    #[error("no similarity values below one")]
    MissingSimilarities,

    #[error("degenerate weighted seminorm for neighbour {0}")]
    DegenerateSeminorm(usize),

    #[error("clustering index undefined: {0}")]
    UndefinedIndex(String),

    #[error("partitions cover different elements")]
    ElementMismatch,

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("input error: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DegenerateCurve(_)
            | Error::ZeroVariance
            | Error::DegenerateData(_)
            | Error::MissingSimilarities => 3,
            _ => 2,
        }
    }
}
