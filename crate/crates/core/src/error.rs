use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max |H - H†| = {0:e})")]
    NotHermitian(f64),
    #[error("Jacobi iteration did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),
    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystems(String),
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("invalid pair ({i}, {j}) for local dimension {d}")]
    InvalidPair { d: usize, i: usize, j: usize },
    #[error("rank {rank} out of range 1..={max}")]
    RankOutOfRange { rank: usize, max: usize },
    #[error("ensemble size {size} is smaller than the rank {rank}")]
    EnsembleTooSmall { size: usize, rank: usize },
    #[error("columns are not orthonormal (max deviation {0:e})")]
    NotIsometry(f64),
    #[error("enumeration of {0} subspace tuples exceeds the limit")]
    TooManySubspaces(u128),
    #[error("entries must be finite")]
    NonFinite,
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
