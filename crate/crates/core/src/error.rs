use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A value outside the domain of the formula being evaluated.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("total population is zero; the force of infection I/N is undefined")]
    ZeroPopulation,

    #[error("no endemic equilibrium: R0 = {r0} <= 1")]
    NoEndemicEquilibrium { r0: f64 },

    #[error("parameters are mutually inconsistent: {0}")]
    InconsistentParameters(String),

    #[error("root not bracketed on [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    RootNotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NotConverged { what: &'static str, iterations: usize },

    #[error("non-finite state produced at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("invalid integration config: {0}")]
    InvalidConfig(String),

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    /// The observed output is (numerically) stationary: dy/dt vanishes on the whole window.
    #[error("degenerate trajectory: dy/dt is below threshold on every sample of the window")]
    DegenerateTrajectory,

    #[error("unidentifiable window: {0}")]
    UnidentifiableWindow(String),

    #[error("dy/dt changes sign inside the window; restrict it to a monotone stretch")]
    NonMonotoneWindow,
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RootNotBracketed { .. }
                | Error::NotConverged { .. }
                | Error::NonFiniteState { .. }
                | Error::StepUnderflow { .. }
        )
    }
}
