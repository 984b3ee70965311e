use thiserror::Error;

/// Errors raised by the simulation and estimation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("operator is not Hermitian (max |M_ij - conj(M_ji)| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("state is not normalized (norm = {norm:.15})")]
    Normalization { norm: f64 },

    #[error("grid extent too small: {0}")]
    GridExtent(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("pre- and post-selected states are orthogonal (|<F|I>| = {overlap:.3e})")]
    OrthogonalSelection { overlap: f64 },

    #[error("joint state has no pointer axis {0}")]
    MissingAxis(usize),

    #[error("no records survived post-selection")]
    EmptyPostSelection,
}

pub type Result<T> = std::result::Result<T, Error>;
