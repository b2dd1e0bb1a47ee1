use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid habitat: {0}")]
    InvalidHabitat(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no positive equilibrium: f0 has no sign change on [0, {beta0}]")]
    NoPositiveEquilibrium { beta0: f64 },

    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    #[error("dispersal operator incompatible with habitat: {0}")]
    HabitatMismatch(String),

    #[error("fields live on different habitats or sample times")]
    MismatchedSampling,

    #[error("time step {dt} exceeds the stability bound {bound}")]
    UnstableTimeStep { dt: f64, bound: f64 },

    #[error("integration diverged at t = {time}")]
    Diverged { time: f64 },

    #[error("part metric needs strictly positive fields (min = {min})")]
    NonPositive { min: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("periodic cell: {0}")]
    InvalidCell(String),

    #[error("power iteration did not converge in {iterations} iterations (residual {residual})")]
    EigenNotConverged { iterations: usize, residual: f64 },

    #[error("eigenfunction lost positivity (min = {min}); operator assembly is inconsistent")]
    PerronViolation { min: f64 },

    #[error("speed minimizer sits at the bracket edge mu = {mu}")]
    BracketEdge { mu: f64 },

    #[error("dispersion relation is not positive at mu -> 0 (lambda = {lambda})")]
    StableZeroState { lambda: f64 },

    #[error("period too large: needs {needed} but the habitat spans {available}")]
    PeriodTooLarge { needed: f64, available: f64 },

    #[error("sub-solution inequality still fails at delta = {delta} (worst {worst})")]
    SubSolutionFailed { delta: f64, worst: f64 },

    #[error("stationary solve did not converge by t = {t_max} (last change {change}, residual {residual})")]
    StationaryNotConverged { t_max: f64, change: f64, residual: f64 },

    #[error("empty window: {0}")]
    EmptyWindow(String),

    #[error("front reached the boundary guard at t = {time} before the fit window opened")]
    FrontHitBoundary { time: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
