use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A physical or numerical parameter is outside its allowed range.
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    /// A matrix failed a density-matrix integrity check.
    #[error("state integrity violated: {0}")]
    StateIntegrity(String),

    /// An operation's precondition (cyclicity, grid density, ...) does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The requested closed form does not cover these parameters.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// Eigenvalues of a weighted branch stay degenerate along the path while
    /// the degenerate subspace moves.
    #[error("persistent eigenvalue degeneracy near t = {t}: {detail}")]
    Degeneracy { t: f64, detail: String },
}
