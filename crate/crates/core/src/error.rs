use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown floating-point format `{0}`")]
    UnknownFormat(String),

    #[error("invalid format: {exponent_bits} exponent bits, {mantissa_bits} mantissa bits")]
    InvalidFormat {
        exponent_bits: u32,
        mantissa_bits: u32,
    },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Raised by the LDLᵀ and Cholesky factorizations when the working
    /// precision cannot keep the matrix positive definite.
    #[error("non-positive pivot {pivot:e} at index {index}")]
    NonPositivePivot { index: usize, pivot: f64 },

    #[error("Jacobi SVD did not converge in {sweeps} sweeps (off-diagonal {off_diagonal:e})")]
    SvdNotConverged { sweeps: usize, off_diagonal: f64 },

    #[error("right-hand side is zero")]
    ZeroRhs,

    #[error("subspace size {p} out of range 1..={max}")]
    StepsOutOfRange { p: usize, max: usize },

    #[error("bidiagonalization broke down before producing a basis vector")]
    GkbBreakdown,

    /// Overflow or an invalid operation in the working format.
    #[error("non-finite {quantity} at bidiagonalization step {step}")]
    NonFinite { quantity: &'static str, step: usize },

    #[error("discrepancy contract violated: {0}")]
    DiscrepancyContract(String),

    #[error("image format error: {0}")]
    Image(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
