use num_complex::Complex64;
use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("map image vanishes numerically at the given point")]
    DegenerateImage,
    #[error("symbolic size {requested} exceeds cap {cap}")]
    CapExceeded { requested: u64, cap: u64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("certification failed: {0}")]
    CertificationFailed(String),
    #[error("root finding left {} roots uncertified", uncertified.len())]
    RootFindFailure { uncertified: Vec<Complex64> },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("construction failed: {0}")]
    ConstructionFailed(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("point lies in no chart's radius-2 disc")]
    ChartMiss,
    #[error("ill-conditioned: {0}")]
    IllConditioned(String),
    #[error("quadrature unconverged: entry moved by {max_change:e} relative")]
    QuadratureUnconverged { max_change: f64 },
    #[error("rank deficient: rank {rank} < {needed}")]
    RankDeficient { rank: usize, needed: usize },
    #[error("degenerate map: {0}")]
    DegenerateMap(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable variant name, printed by the CLI on failure.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DegenerateImage => "DegenerateImage",
            Error::CapExceeded { .. } => "CapExceeded",
            Error::Unsupported(_) => "Unsupported",
            Error::CertificationFailed(_) => "CertificationFailed",
            Error::RootFindFailure { .. } => "RootFindFailure",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::InsufficientData(_) => "InsufficientData",
            Error::ConstructionFailed(_) => "ConstructionFailed",
            Error::InvalidGeometry(_) => "InvalidGeometry",
            Error::ChartMiss => "ChartMiss",
            Error::IllConditioned(_) => "IllConditioned",
            Error::QuadratureUnconverged { .. } => "QuadratureUnconverged",
            Error::RankDeficient { .. } => "RankDeficient",
            Error::DegenerateMap(_) => "DegenerateMap",
            Error::Parse { .. } => "Parse",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
