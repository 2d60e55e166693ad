use thiserror::Error;

/// Failures raised by the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("overflow: magnitude exceeds the floating-point range")]
    Overflow,
    #[error("non-finite value encountered{0}")]
    NonFinite(String),
    #[error("tolerance not met: {0}")]
    ToleranceNotMet(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("root on integration contour near {re}+{im}i")]
    RootOnContour { re: f64, im: f64 },
    #[error("lost root while tracking; last good point g={g}, E={e}")]
    LostRoot { g: f64, e: f64 },
    #[error("matrix and transcendental methods disagree: {0}")]
    SeedMismatch(String),
    #[error("inconsistent eigenfunction coefficient (relative difference {0:e})")]
    InconsistentC(f64),
    #[error("Ai vanishes at a boundary evaluation point")]
    PoleAtAiZero,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("too few valid grid points for a ratio")]
    DegenerateDenominator,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn non_finite_at(what: impl std::fmt::Display) -> Self {
        Error::NonFinite(format!(" at {what}"))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
