use num_complex::Complex64;

/// Crate-wide error type.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("argument {0} lies on the branch cut (-inf, 0]")]
    BranchCut(Complex64),
    #[error("floating-point overflow evaluating {0} at |z| = {1:.3e}")]
    Overflow(&'static str, f64),
    #[error("quadrature failed to reach tolerance {tol:.3e} (best error {best:.3e})")]
    QuadratureFailed { tol: f64, best: f64 },
    #[error("root finding failed: {0}")]
    RootFinding(String),
    #[error("no instability witness exists: {0}")]
    NoWitness(String),
    #[error("linear solve failed: {0}")]
    SingularMatrix(String),
    #[error("eigenvalue solve failed: {0}")]
    EigenFailed(String),
    #[error("mesh/treatment mismatch: {0}")]
    MeshMismatch(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
