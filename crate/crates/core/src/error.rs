use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain where the model is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unstable resonator: mirror spacing {spacing} m must lie in (0, 2 * {curvature} m)")]
    UnstableResonator { spacing: f64, curvature: f64 },

    #[error("finesse diverges: R*L = {0} must be < 1")]
    Divergent(f64),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("field {field} T is outside the first-order Zeeman regime (|B| < {limit} T)")]
    OutOfRegime { field: f64, limit: f64 },

    #[error("sample rate {sample_rate} Hz is below 10x the modulation frequency {fmod} Hz")]
    Aliasing { sample_rate: f64, fmod: f64 },

    #[error("series too short: need {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("band [{lo}, {hi}] Hz contains no spectral bins")]
    EmptyBand { lo: f64, hi: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by malformed configuration or input files,
    /// as opposed to numerical failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Schema(_) | Error::Config(_) | Error::Json(_) | Error::Csv(_) | Error::Io(_)
        )
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(msg()))
    }
}
