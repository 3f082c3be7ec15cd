use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    Dimension { op: &'static str, detail: String },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is rank deficient or ill-conditioned (condition number {condition:.3e})")]
    RankDeficient { condition: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("point is off the complex-circle manifold (max modulus error {deviation:.3e})")]
    OffManifold { deviation: f64 },

    #[error("retraction hit a zero entry at index {index}")]
    DegenerateStep { index: usize },

    #[error("direction is not a descent direction (slope {slope:.3e})")]
    NotDescent { slope: f64 },

    #[error("line search exhausted {backtracks} backtracks")]
    LineSearchStalled { backtracks: usize },

    #[error("previous gradient has zero norm")]
    ZeroGradient,

    #[error("infeasible point: {0}")]
    Infeasible(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err(op: &'static str, detail: impl Into<String>) -> Error {
    Error::Dimension {
        op,
        detail: detail.into(),
    }
}
