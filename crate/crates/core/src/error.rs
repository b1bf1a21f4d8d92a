use thiserror::Error;

/// Failures raised by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("operands are sampled on different grids")]
    GridMismatch,

    #[error("window synthesis failed: residual {residual:.3e} exceeds {limit:.1e} of peak ({what})")]
    Synthesis {
        residual: f64,
        limit: f64,
        what: &'static str,
    },

    #[error("shift {shift} exceeds half of the grid half-width {half_width}")]
    ShiftTooLarge { shift: f64, half_width: f64 },

    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("window does not generate a frame (lower bound {lower_bound:.3e}, upper bound {upper_bound:.3e})")]
    NotAFrame { lower_bound: f64, upper_bound: f64 },

    #[error("window is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("window is not Parseval (Wexler-Raz residual {wr_residual:.3e})")]
    NotParseval { wr_residual: f64 },

    #[error("degenerate window pair: |<psi, eta>| = {overlap:.3e}")]
    DegeneratePair { overlap: f64 },

    #[error("operands belong to different algebras")]
    AlgebraMismatch,

    #[error("truncation overflow: shift {shift} needs a grid half-width above {required}, have {half_width}")]
    TruncationOverflow {
        shift: f64,
        required: f64,
        half_width: f64,
    },

    #[error("invalid window spec `{spec}`: {reason}")]
    WindowSpec { spec: String, reason: String },

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
