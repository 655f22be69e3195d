use std::io;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid nonlinearity: f({n}) = {value} (must be finite and positive)")]
    InvalidNonlinearity { n: u64, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A physics constraint on the model parameters was violated.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("numerical consistency error: {what} = {value} lies outside [0, 1]")]
    NumericalConsistency { what: &'static str, value: f64 },

    #[error("integration failure for Fock level {n} near t = {t}: {reason}")]
    IntegrationFailure { n: usize, t: f64, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown preset `{name}`; available presets: {}", available.join(", "))]
    UnknownPreset {
        name: String,
        available: Vec<String>,
    },

    #[error("cannot emit an empty record set")]
    EmptyRecords,

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the caller's input (configs, parameters),
    /// as opposed to I/O or numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidNonlinearity { .. }
                | Error::InvalidParameter(_)
                | Error::Validation(_)
                | Error::Config(_)
                | Error::UnknownPreset { .. }
        )
    }
}
