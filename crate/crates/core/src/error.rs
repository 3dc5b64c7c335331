use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed input text (config syntax, CSV syntax).
    Parse,
    /// Input parsed but violates a precondition or invariant.
    Data,
    /// A numerical routine failed to reach its tolerance.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "quadrature did not converge: estimated error {achieved:.3e} exceeds tolerance {requested:.3e} after {intervals} subintervals"
    )]
    Quadrature {
        achieved: f64,
        requested: f64,
        intervals: usize,
    },

    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("fitted visibility {visibility:.6} is outside [0, 1]")]
    VisibilityOutOfRange { visibility: f64 },

    #[error("scan spans {periods:.3} fringe periods, at least one full period is required")]
    InsufficientSpan { periods: f64 },

    #[error("degenerate abscissas: {0}")]
    DegenerateAbscissas(String),

    #[error("no chi-square minimum bracketed in [0, {sigma_max:.3e}] m^2")]
    NoBracket { sigma_max: f64 },

    #[error("{failed} of {total} simulated points failed; first at {first_distance_m} m: {first_reason}")]
    SimulationFailed {
        failed: usize,
        total: usize,
        first_distance_m: f64,
        first_reason: String,
    },

    #[error("{path}:{line}: {message}")]
    Config {
        path: PathBuf,
        line: usize,
        message: String,
        class: ErrorClass,
    },

    #[error("{path}:{line}: {message}")]
    Table {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Quadrature { .. }
            | Error::NoConvergence { .. }
            | Error::NoBracket { .. }
            | Error::SimulationFailed { .. } => {
                ErrorClass::Numerical
            }
            Error::Config { class, .. } => *class,
            Error::Table { .. } | Error::Csv(_) | Error::Json(_) => ErrorClass::Parse,
            Error::Domain(_)
            | Error::VisibilityOutOfRange { .. }
            | Error::InsufficientSpan { .. }
            | Error::DegenerateAbscissas(_)
            | Error::Io { .. } => ErrorClass::Data,
        }
    }

    /// Short machine-readable identifier for the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Quadrature { .. } => "quadrature",
            Error::NoConvergence { .. } => "no_convergence",
            Error::VisibilityOutOfRange { .. } => "visibility_out_of_range",
            Error::InsufficientSpan { .. } => "insufficient_span",
            Error::DegenerateAbscissas(_) => "degenerate_abscissas",
            Error::NoBracket { .. } => "no_bracket",
            Error::SimulationFailed { .. } => "simulation_failed",
            Error::Config { .. } => "config",
            Error::Table { .. } => "table",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}
