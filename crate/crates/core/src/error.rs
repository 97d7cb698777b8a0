use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid hamiltonian: {0}")]
    InvalidHamiltonian(String),

    #[error("degenerate hamiltonian: energy gap {0:e} below 1e-9")]
    DegenerateHamiltonian(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integrator failure: {0}")]
    Integrator(String),

    #[error("no valid steady state: {0}")]
    NoSteadyState(String),

    #[error("steady state has energy-basis coherence {0:e}; no Gibbs form exists")]
    NotGibbs(f64),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    /// True for failures of the numerical integration itself (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Integrator(_) | Error::NoSteadyState(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
