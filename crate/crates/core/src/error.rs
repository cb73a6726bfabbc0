use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid Markov map: {0}")]
    InvalidMap(String),

    #[error("invalid fiber map: {0}")]
    InvalidFiber(String),

    #[error("invalid driven system: {0}")]
    InvalidSystem(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: String, iterations: usize },

    #[error("transfer-matrix mode unsupported: {0}")]
    ModeUnsupported(String),

    #[error("pressure has no positive zero below s = {cap} (psi({cap}) = {psi_at_cap})")]
    NoPositiveZero { cap: f64, psi_at_cap: f64 },

    #[error("Hoelder data missing for the state multiplier")]
    NonHolder,

    #[error("only {points} window points carry positive mass (need at least 3)")]
    InsufficientMass { points: usize },

    #[error("degenerate exponents: Gamma + Lambda = {sum} (Gamma = {gamma}, Lambda = {lambda})")]
    DegenerateExponent { gamma: f64, lambda: f64, sum: f64 },

    #[error("Birkhoff averages not converged at theta = {theta}: relative change {change:.3e}")]
    NotConverged { theta: f64, change: f64 },
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to rejected inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::NoPositiveZero { .. }
                | Error::InsufficientMass { .. }
                | Error::DegenerateExponent { .. }
                | Error::NotConverged { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
