use thiserror::Error;

/// Errors raised by the model, the control solver and the simulator.
///
/// Scalar payloads are carried as `f64` regardless of the evaluation type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {what} (got {value})")]
    Domain { what: &'static str, value: f64 },

    #[error("degenerate denominator 1 - sigma(2 + gamma) = 0")]
    DegenerateDenominator,

    #[error("degenerate exponent 1 - beta(2 + gamma) = 0")]
    DegenerateExponent,

    #[error("degenerate distraction elasticity: {0}")]
    DegenerateIes(&'static str),

    #[error("no interior solution with s >= 0: closed form gives s = {s}, l = {l}")]
    InfeasibleDistraction { s: f64, l: f64 },

    #[error(
        "no interior maximum: best grid point (c = {c}, s = {s}, l = {l}) lies on the boundary"
    )]
    NoInteriorMaximum { c: f64, s: f64, l: f64 },

    #[error("could not bracket a root on [{lo}, {hi}]")]
    Bracketing { lo: f64, hi: f64 },

    #[error("root refinement did not converge after {iterations} iterations")]
    RootNotConverged { iterations: usize },

    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("control solve failed at t = {t}: {source}")]
    ControlFailure {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("insufficient data: {have} records after burn-in, need at least {need}")]
    InsufficientData { have: usize, need: usize },

    #[error("utility integral diverges: convergence exponent x = {x} is not negative")]
    Divergence { x: f64 },

    #[error("parameters outside the balanced-growth regime: {0}")]
    InvalidRegime(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64) -> Error {
    Error::Domain { what, value }
}
