use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Errors raised by the algorithmic core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter outside its mathematical domain.
    Domain(&'static str),
    /// Invalid argument shape or value.
    InvalidInput(String),
    /// Drift or diffusion was not finite at a state.
    NonFiniteModel { index: Option<usize>, point: Vec<f64> },
    /// A candidate evaluated to a non-finite value while building a design.
    NonFiniteDesign { candidate: usize, row: usize },
    /// Coordinate descent hit the sweep cap.
    NonConvergence { sweeps: usize, relative_gap: f64 },
    /// Too little usable data (empty rings, under-occupied bins, ...).
    InsufficientData(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::NonFiniteModel { index: Some(i), point } => {
                write!(f, "model not finite at sample {i}, state {point:?}")
            }
            Error::NonFiniteModel { index: None, point } => {
                write!(f, "model not finite at state {point:?}")
            }
            Error::NonFiniteDesign { candidate, row } => {
                write!(f, "candidate {candidate} is not finite at training row {row}")
            }
            Error::NonConvergence { sweeps, relative_gap } => write!(
                f,
                "coordinate descent did not converge after {sweeps} sweeps (relative change {relative_gap:e})"
            ),
            Error::InsufficientData(msg) => write!(f, "insufficient data: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
