use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Input data violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A path or chord is degenerate, so the requested index is undefined.
    #[error("degenerate {kind}: {detail} (margin {margin:.3e})")]
    Degenerate {
        kind: &'static str,
        detail: String,
        margin: f64,
    },

    /// The discretization cannot resolve the requested quantity.
    #[error("ill-conditioned computation: {0}; refine the discretization")]
    IllConditioned(String),

    /// A point left the domain of a model (collision locus, chart boundary).
    #[error("domain error: {0}")]
    Domain(String),

    /// Geometric hypothesis failure (star-shapedness, transversality).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// An iterative solver failed to converge.
    #[error("search failed: {0}")]
    SearchFailed(String),

    /// Internal consistency check failed; indicates a bug, not bad input.
    #[error("internal consistency violation: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
