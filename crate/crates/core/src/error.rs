use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("ambient dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("hyperplane {second} is proportional to hyperplane {first}")]
    DuplicateHyperplane { first: usize, second: usize },
    #[error("hyperplane {index} has a zero normal")]
    ZeroNormal { index: usize },
    #[error("arrangement is not essential: normals have rank {rank} < {ell}")]
    NonEssential { rank: usize, ell: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unknown catalog entry `{0}`")]
    UnknownCatalog(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("element {0} is not in the lattice")]
    NotInLattice(usize),
    #[error("vector does not lie in the target subspace: {0}")]
    NotInSubspace(String),
    #[error("computation cap exceeded: {0}")]
    CapExceeded(String),
    #[error("consistency failure: {0}")]
    Consistency(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CapExceeded(_) => 2,
            Error::Consistency(_) | Error::NotInSubspace(_) => 3,
            _ => 1,
        }
    }
}
