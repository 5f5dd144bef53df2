use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("surface is not in Monge form: coefficient of x^{i} y^{j} is {value}, expected 0")]
    NotMongeForm { i: usize, j: usize, value: f64 },

    #[error("neighbourhood radius must be positive, got {0}")]
    InvalidRadius(f64),

    #[error("polynomial degree {degree} exceeds the configured maximum {max}")]
    DegreeTooHigh { degree: usize, max: usize },

    #[error("contact at the origin is degenerate: {0}")]
    DegenerateContact(String),

    #[error("origin is not an umbilic point (classified as {0})")]
    NotUmbilic(String),

    #[error("level {level} is singular near ({x}, {y}): gradient below floor")]
    SingularLevel { level: f64, x: f64, y: f64 },

    #[error("continuation diverged near ({x}, {y}): {reason}")]
    TraceDivergence { x: f64, y: f64, reason: String },

    #[error("gradient vanishes at ({x}, {y})")]
    SingularPoint { x: f64, y: f64 },

    #[error("points are collinear")]
    CollinearPoints,

    #[error("feature counts differ between the two smallest |k| rungs for sign {sign}: {detail}")]
    UnstableCounts { sign: i8, detail: String },

    #[error("Newton iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("continuation lost the solution path at k = {k} after {completed} rungs")]
    PathLost { k: f64, completed: usize },

    #[error("path too short for a series fit: {0}")]
    InsufficientPath(String),

    #[error("genericity assumption b1 != b3 violated (b1 = {b1}, b3 = {b3})")]
    GenericityViolated { b1: f64, b3: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotMongeForm { .. } => "NotMongeForm",
            Error::InvalidRadius(_) => "InvalidRadius",
            Error::DegreeTooHigh { .. } => "DegreeTooHigh",
            Error::DegenerateContact(_) => "DegenerateContact",
            Error::NotUmbilic(_) => "NotUmbilic",
            Error::SingularLevel { .. } => "SingularLevel",
            Error::TraceDivergence { .. } => "TraceDivergence",
            Error::SingularPoint { .. } => "SingularPoint",
            Error::CollinearPoints => "CollinearPoints",
            Error::UnstableCounts { .. } => "UnstableCounts",
            Error::NoConvergence(_) => "NoConvergence",
            Error::PathLost { .. } => "PathLost",
            Error::InsufficientPath(_) => "InsufficientPath",
            Error::GenericityViolated { .. } => "GenericityViolated",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Io(_) => "Io",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
