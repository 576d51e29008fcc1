use alloc::string::String;

use num_complex::Complex64;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A pole kernel was evaluated at `s = x`.
    #[error("kernel pole hit: sample {s} coincides with point {x}")]
    Domain { s: Complex64, x: Complex64 },

    #[error("collocation column {0} is identically zero")]
    DegenerateColumn(usize),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("singular value decomposition did not converge")]
    ConvergenceFailure,

    #[error("eigenvalue iteration did not converge")]
    EigenFailure,

    /// Every singular value fell below the pseudo-inverse threshold.
    #[error("all singular values are below the threshold {tol:e}")]
    AllTruncated { tol: f64 },

    #[error("Krylov matrix is rank deficient: sigma_{n_x}/sigma_1 = {ratio:e}")]
    RankDeficient { n_x: usize, ratio: f64 },

    #[error("weight design matrix is identically zero")]
    DegenerateDesign,

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}
