use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("fock_dim must be at least {min}, got {got}")]
    FockDimTooSmall { got: usize, min: usize },

    #[error("invalid model parameter `{field}` = {value}: {reason}")]
    InvalidParams {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("{op}: matrix is not square ({rows}x{cols})")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("generator is not anti-Hermitian: ||G + G^dag|| = {residual:e} > {tol:e}")]
    NotAntiHermitian { residual: f64, tol: f64 },

    #[error("matrix is not Hermitian: ||H - H^dag|| = {residual:e} > {tol:e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("matrix is not unitary: ||U^dag U - I|| = {residual:e} > {tol:e}")]
    NotUnitary { residual: f64, tol: f64 },

    #[error("state norm drifted by {drift:e}")]
    NormDrift { drift: f64 },

    #[error("quadrature needs at least {min} panels, got {got}")]
    TooFewPanels { got: usize, min: usize },

    #[error("step doubling did not reach tol {tol:e} within {max_steps} steps (last difference {last:e})")]
    NonConvergence {
        tol: f64,
        max_steps: usize,
        last: f64,
    },

    #[error("invalid tolerance {0:e}")]
    InvalidTolerance(f64),

    #[error("invalid time {0}")]
    InvalidTime(f64),

    #[error("buffer {buffer} out of range 0..={max}")]
    BufferOutOfRange { buffer: usize, max: usize },

    #[error("magnus order must be 1 or 2, got {0}")]
    InvalidOrder(u32),

    #[error("{0}")]
    Precondition(String),

    #[error("config `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
