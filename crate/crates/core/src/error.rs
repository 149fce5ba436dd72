use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A value violated one of the documented invariants of a state container
    /// or parameter set. `invariant` names the rule that failed.
    #[error("invalid {what}: {invariant} violated ({detail})")]
    Validation {
        what: &'static str,
        invariant: &'static str,
        detail: String,
    },
    #[error("bin {index} has zero weight; skip it")]
    ZeroWeightBin { index: usize },
    #[error("wavelength bin width {bin_width_nm:.4} nm is narrower than the frequency grid spacing {grid_spacing_nm:.4} nm; use a denser grid")]
    GridTooCoarse {
        bin_width_nm: f64,
        grid_spacing_nm: f64,
    },
    #[error("no counts recorded; cannot reconstruct a state")]
    NoCounts,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn validation(
        what: &'static str,
        invariant: &'static str,
        detail: impl Into<String>,
    ) -> Self {
        Error::Validation {
            what,
            invariant,
            detail: detail.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
