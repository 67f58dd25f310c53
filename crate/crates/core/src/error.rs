use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("grid size mismatch: field has {found} values, manifold grid has {expected}")]
    GridMismatch { expected: usize, found: usize },

    #[error("manifold mismatch: {0}")]
    ManifoldMismatch(String),

    #[error("invalid manifold: {0}")]
    InvalidManifold(String),

    #[error("{0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(
        "snapshot window k = {k} spanning ({lo:.9}, {hi:.9}) contains no snapshot; \
         rerun with denser snapshotting"
    )]
    EmptyWindow { k: usize, lo: f64, hi: f64 },

    #[error("non-finite field values at t = {t}")]
    NonFinite { t: f64 },
}

pub type Result<T> = std::result::Result<T, CoreError>;
