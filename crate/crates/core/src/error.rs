use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tube geometry is undefined for N = {0}; at least two hexagons around the circumference are required")]
    GeometryUndefined(usize),

    #[error("integration did not converge: relative residual {residual:.3e} after {steps} steps")]
    IntegrationFailure { residual: f64, steps: usize },

    #[error("count mismatch in {what}: found {found}, expected {expected}")]
    CountMismatch {
        what: String,
        found: usize,
        expected: String,
    },

    #[error("monodromy system is nearly singular (condition number {0:.3e}); energy is too close to the Dirichlet spectrum")]
    NearDirichletSingularity(f64),

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("gap endpoint {0} does not lie on any of the tagged zero sets")]
    ClassificationFailure(f64),

    #[error("operation requires an even potential")]
    EvennessRequired,

    #[error("{mu} is not a Dirichlet eigenvalue: |phi(1)| = {residual:.3e}")]
    NotAnEigenvalue { mu: f64, residual: f64 },

    #[error("expansion formula applied on the wrong branch")]
    WrongBranch,

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigen-solver failure: {0}")]
    EigenSolver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::InvalidArgument(_)
                | Error::InvalidPotential(_)
                | Error::GeometryUndefined(_)
                | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
