use thiserror::Error;

use crate::prox_engine::ProxResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("extended-real arithmetic: {0}")]
    ExtendedArithmetic(&'static str),

    #[error("no closed-form conjugate for {0}")]
    UnsupportedConjugate(String),

    #[error("no closed-form prox for {0}")]
    UnsupportedProx(String),

    #[error("subdifferential not supported for {0}")]
    UnsupportedSubdifferential(String),

    #[error("subdifferential is empty: point lies outside the domain")]
    EmptySubdifferential,

    #[error("prox solver did not converge: residual {} after {} iterations", .0.residual, .0.iterations)]
    SolverDidNotConverge(Box<ProxResult>),

    #[error("objective is +inf at every probe point")]
    DomainUnreachable,

    #[error("value table has no finite entry")]
    AllInfinite,

    #[error("oracle field failed validation: {0}")]
    NonConservativeField(String),

    #[error("anchor lies outside the domain of {0}")]
    AnchorOutsideDomain(String),

    #[error("the set does not contain the origin")]
    OriginNotInC,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn dim(context: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
            expected,
            found,
        }
    }
}
