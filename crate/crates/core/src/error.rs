use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: String, found: String },

    #[error("matrix is not Hermitian: deviation {deviation:e} exceeds tolerance {tol:e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("eigenvalue {eigenvalue:e} is outside the domain (must exceed {bound:e})")]
    Domain { eigenvalue: f64, bound: f64 },

    #[error("operator is not positive semidefinite: eigenvalue {eigenvalue:e}")]
    NotPositive { eigenvalue: f64 },

    #[error("state {index} has posterior weight but zero prior weight")]
    SupportViolation { index: usize },

    #[error("constraint {constraint}: target {target} is not strictly inside ({lower}, {upper})")]
    Infeasible {
        constraint: usize,
        target: f64,
        lower: f64,
        upper: f64,
    },

    #[error("constraints are not jointly achievable: multiplier norm {norm:e} exceeded {bound:e}")]
    JointlyInfeasible { norm: f64, bound: f64 },

    #[error("eigensolver did not converge for dim {dim} after {iterations} sweeps")]
    SolverFailure { dim: usize, iterations: usize },

    #[error("solver did not converge after {iterations} iterations (max residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn shape(expected: impl ToString, found: impl ToString) -> Self {
        Error::Shape {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// True for the two infeasibility variants.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible { .. } | Error::JointlyInfeasible { .. })
    }
}
