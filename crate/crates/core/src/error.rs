use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("uniqueness condition violated: min((P-1)*T_a, Q) = {available} < L = {paths}")]
    UniquenessViolation { available: usize, paths: usize },

    #[error("invalid unfolding mode {0}; expected 1, 2 or 3")]
    InvalidMode(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("index ({q}, {t}, {p}) outside tensor of size {dims:?}")]
    IndexOutOfRange {
        q: usize,
        t: usize,
        p: usize,
        dims: (usize, usize, usize),
    },

    #[error("rank deficient: singular value {index} is {value:e}, below threshold {threshold:e}")]
    RankDeficient {
        index: usize,
        value: f64,
        threshold: f64,
    },

    #[error("eigenvector matrix ill-conditioned (cond = {0:e})")]
    IllConditioned(f64),

    #[error("Khatri-Rao factor lost column rank (rank {rank} < {expected})")]
    SingularKhatriRao { rank: usize, expected: usize },

    #[error("Fisher information matrix is singular")]
    SingularFim,

    #[error("reference vector has zero norm")]
    ZeroReference,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable identifier used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::UniquenessViolation { .. } => "UniquenessViolation",
            Error::InvalidMode(_) => "InvalidMode",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::RankDeficient { .. } => "RankDeficient",
            Error::IllConditioned(_) => "IllConditioned",
            Error::SingularKhatriRao { .. } => "SingularKhatriRao",
            Error::SingularFim => "SingularFim",
            Error::ZeroReference => "ZeroReference",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "IoError",
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
