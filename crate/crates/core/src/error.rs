use thiserror::Error;

/// Errors raised anywhere in the lab.
///
/// Variants map onto the failure classes the CLI turns into exit codes:
/// configuration problems, solver failures and analysis failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate body: {0}")]
    DegenerateBody(String),

    #[error("resolution too coarse: {0}")]
    ResolutionTooCoarse(String),

    #[error("solver diverged after {iterations} iterations (residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("case classification ambiguous: {0}")]
    ClassificationAmbiguous(String),

    #[error("stencil leaves the domain at node ({0}, {1})")]
    StencilOutOfDomain(usize, usize),

    #[error("degenerate spatial gradient (|grad u| = {0:e})")]
    DegenerateGradient(f64),

    #[error("degenerate time derivative (u_t = {0:e})")]
    DegenerateTimeDerivative(f64),

    #[error("level {0} is out of range")]
    LevelOutOfRange(f64),

    #[error("field is not quasiconcave: {0}")]
    NotQuasiconcave(String),

    #[error("monotonicity in time violated: {0}")]
    MonotonicityViolated(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures originating in the linear solvers or in file output.
    pub fn is_solver_error(&self) -> bool {
        matches!(self, Error::SolverDiverged { .. } | Error::Io(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
