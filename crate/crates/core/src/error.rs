use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::functionals::Solution;
use crate::params::Violation;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone)]
pub enum Error {
    /// A parameter or sample was NaN or infinite.
    InvalidNumber {
        field: &'static str,
    },
    /// Model parameters failed one or more admissibility predicates.
    Parameter(Vec<Violation>),
    Grid(String),
    Numerics(String),
    /// A linear solve inside the gauge or Newton machinery broke down.
    Solver(String),
    Options(String),
    /// The line search could not find a decrease; carries the last iterate.
    Stalled(Box<Solution>),
    /// Every descent attempt converged without certifying `I < 0`, usually
    /// at the trivial pair `(0, g_inf)`.
    TrivialCollapse(Box<Solution>),
    /// Outward integration produced a non-finite state.
    BlowUp {
        radius: f64,
    },
    /// The shooting matcher found no admissible `(f0, g0)`.
    NoMatch(String),
    Analysis(String),
}

impl Error {
    /// Partial solution attached to `Stalled` / `TrivialCollapse`.
    pub fn partial(&self) -> Option<&Solution> {
        match self {
            Error::Stalled(s) | Error::TrivialCollapse(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidNumber { field } => write!(f, "non-finite value for `{field}`"),
            Error::Parameter(violations) => {
                write!(f, "inadmissible parameters:")?;
                for v in violations {
                    write!(f, " [{v}]")?;
                }
                Ok(())
            }
            Error::Grid(msg) => write!(f, "grid error: {msg}"),
            Error::Numerics(msg) => write!(f, "numerics error: {msg}"),
            Error::Solver(msg) => write!(f, "solver error: {msg}"),
            Error::Options(msg) => write!(f, "invalid options: {msg}"),
            Error::Stalled(s) => write!(
                f,
                "line search stalled after {} iterations (I = {:.6e})",
                s.report.iterations, s.report.i
            ),
            Error::TrivialCollapse(s) => write!(
                f,
                "descent ended without a nontrivial solution (I = {:.6e}, max f = {:.3e})",
                s.report.i,
                s.profile.f.iter().cloned().fold(0.0, f64::max)
            ),
            Error::BlowUp { radius } => write!(f, "integration blew up at r = {radius:.6}"),
            Error::NoMatch(msg) => write!(f, "shooting found no match: {msg}"),
            Error::Analysis(msg) => write!(f, "analysis error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
