use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Failure modes shared by every solver in the crate.
///
/// The variants map one-to-one onto the typed codes reported by the run
/// harness (see [`Error::code`]).
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Invalid grid, law or run parameters.
    Config(String),
    /// An argument outside the domain of the operation.
    Domain(String),
    /// Time step larger than the stability bound.
    Stability { dt: f64, limit: f64 },
    /// A density went negative beyond the floor tolerance.
    Positivity { cell: usize, value: f64 },
    /// Poisson data with a non-zero mean.
    Compatibility { mean: f64 },
    /// Equilibrium density left the bracket required by the comparison theory.
    VacuumProximity { value: f64, lower: f64, upper: f64 },
    /// Iterative solver did not reach its tolerance.
    Solver { residual: f64, iterations: usize },
    /// Requested a lemma branch that is measured but not certified.
    UnsupportedBranch(String),
    /// Not enough valid data to fit a rate.
    Fit(String),
}

impl Error {
    /// Stable short code used in run metadata and exit-status mapping.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Domain(_) => "domain",
            Error::Stability { .. } => "stability",
            Error::Positivity { .. } => "positivity",
            Error::Compatibility { .. } => "compatibility",
            Error::VacuumProximity { .. } => "vacuum-proximity",
            Error::Solver { .. } => "solver",
            Error::UnsupportedBranch(_) => "unsupported-branch",
            Error::Fit(_) => "fit",
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(m) => write!(f, "configuration error: {m}"),
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Stability { dt, limit } => {
                write!(f, "time step {dt:e} exceeds stability limit {limit:e}")
            }
            Error::Positivity { cell, value } => {
                write!(f, "negative density {value:e} in cell {cell}")
            }
            Error::Compatibility { mean } => {
                write!(f, "Neumann data is not mean-zero (mean {mean:e})")
            }
            Error::VacuumProximity { value, lower, upper } => write!(
                f,
                "equilibrium density {value:e} left the admissible bracket [{lower:e}, {upper:e}]"
            ),
            Error::Solver {
                residual,
                iterations,
            } => write!(
                f,
                "solver stopped after {iterations} iterations with residual {residual:e}"
            ),
            Error::UnsupportedBranch(m) => write!(f, "unsupported branch: {m}"),
            Error::Fit(m) => write!(f, "fit error: {m}"),
        }
    }
}

impl core::error::Error for Error {}
