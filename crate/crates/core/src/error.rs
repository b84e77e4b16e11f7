use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module.
///
/// Variants split into two families that the CLI maps to distinct exit
/// codes: input/validation problems (exit 2) and numerical failures such as
/// exhausted refinement or ill-conditioned eigenspaces (exit 3).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symplectic: residual {residual:e} exceeds tolerance {tolerance:e}")]
    NotSymplectic { residual: f64, tolerance: f64 },

    #[error("determinant {det} is not within tolerance of +1")]
    BadDeterminant { det: f64 },

    #[error("basis is rank deficient: smallest singular value {sigma:e} below {tolerance:e}")]
    RankDeficient { sigma: f64, tolerance: f64 },

    #[error("subspace is not coisotropic: complement leaves it by {residual:e}")]
    NotCoisotropic { residual: f64 },

    #[error("matrix is not orthogonal-symplectic: residual {residual:e}")]
    NotUnitary { residual: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("document rejected: {0}")]
    Document(String),

    #[error("samples too sparse at index {index}: {detail}")]
    RefinementRequired { index: usize, detail: String },

    #[error("phase step {step:.4} rad between t={t0} and t={t1} not resolved within the refinement budget")]
    RefinementExhausted { t0: f64, t1: f64, step: f64 },

    #[error("eigenvalue solver failed to converge")]
    EigenSolver,

    #[error("ill-conditioned eigenspace near {eigenvalue}: {detail}")]
    IllConditioned { eigenvalue: String, detail: String },

    #[error("ambiguous spectral classification: {0}")]
    BoundaryAmbiguity(String),

    #[error("degenerate endpoint: eigenvalue {eigenvalue} lies within {tolerance:e} of 1")]
    DegenerateEndpoint { eigenvalue: String, tolerance: f64 },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RefinementRequired { .. }
                | Error::RefinementExhausted { .. }
                | Error::EigenSolver
                | Error::IllConditioned { .. }
                | Error::BoundaryAmbiguity(_)
        )
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_numerical() {
            3
        } else {
            2
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Document(format!("malformed JSON: {e}"))
    }
}
