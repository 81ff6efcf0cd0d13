use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("series did not converge within {max_terms} terms")]
    NonConvergence { max_terms: usize },

    #[error("pole: {0}")]
    Pole(String),

    #[error("zero argument is not allowed for {0}")]
    ZeroArgument(&'static str),

    #[error("order {0} is excluded")]
    ExcludedOrder(String),

    #[error("invalid expansion: {0}")]
    InvalidExpansion(String),

    #[error("invalid Hamiltonian: {0}")]
    InvalidHamiltonian(String),

    #[error("excluded flux nu = {0}: negative integers are not allowed in the right sector")]
    ExcludedFlux(f64),

    #[error("exceptional point: {0}")]
    ExceptionalPoint(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("trajectory left the bounded region at t = {t}")]
    Overflow { t: f64 },

    #[error("singular point reached at t = {t}")]
    Singular { t: f64 },

    #[error("outside branch domain: {0}")]
    BranchDomain(String),

    #[error("outside convergence region: {0}")]
    Region(String),

    #[error("pole too close to the contour: distance {distance:e}")]
    PoleProximity { distance: f64 },

    #[error("energy is not real: imaginary part {0:e}")]
    NonRealEnergy(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
