//! Error type shared by all solver modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A domain specification violates its invariants (nonpositive radius,
    /// annulus with R <= r, disconnected union, ...).
    #[error("invalid domain spec: {0}")]
    InvalidSpec(String),

    /// The grid is too coarse to resolve a geometric feature or a kernel.
    #[error("resolution too coarse: {0}")]
    TooCoarse(String),

    /// The operation is not defined for this input (e.g. surface area of a
    /// union of balls).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An argument violates a documented precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An iterative solver hit its iteration cap before reaching tolerance.
    #[error("{what} did not converge: residual {residual:.3e} after {iterations} iterations")]
    NonConvergence {
        what: String,
        residual: f64,
        iterations: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
