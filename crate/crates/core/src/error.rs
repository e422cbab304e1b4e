use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("site {site} out of range for {num_sites} sites")]
    SiteOutOfRange { site: usize, num_sites: usize },
    #[error("two-qubit gate needs distinct sites, got {0} twice")]
    RepeatedSite(usize),
    #[error("invalid two-qubit Clifford index {0} (expected < 11520)")]
    InvalidGate(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("regions overlap at site {0}")]
    OverlappingRegions(usize),
    #[error("state has no reference site")]
    NoReference,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("state is not pure: {generators} generators on {sites} sites")]
    NotPure { generators: usize, sites: usize },
    #[error("invalid stabilizer generators: {0}")]
    InvalidGenerators(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("malformed noise pattern: {0}")]
    MalformedPattern(String),
    #[error("replica count {0} too large for enumeration (max 8)")]
    ReplicaCountTooLarge(usize),
    #[error("wrong noise placement for this comparison: {0}")]
    WrongPlacement(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
