use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("ordering error: need p_F < p_D, got p_F = {p_f:e}, p_D = {p_d:e}")]
    Ordering { p_f: f64, p_d: f64 },

    #[error("below threshold: M = {m:e} does not exceed M_0 = {m0:e}")]
    BelowThreshold { m: f64, m0: f64 },

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("window capacity exceeded: {terms} summation terms (limit {limit})")]
    WindowCapacity { terms: u128, limit: u128 },

    #[error("dimension error: truncated space of dimension {dim} exceeds cap {cap}")]
    Dimension { dim: usize, cap: usize },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short identifier for reports, one per variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Domain(_) => "domain_error",
            Error::Ordering { .. } => "ordering_error",
            Error::BelowThreshold { .. } => "below_threshold",
            Error::NoRoot(_) => "no_root",
            Error::Range(_) => "range_error",
            Error::WindowCapacity { .. } => "window_capacity",
            Error::Dimension { .. } => "dimension_error",
            Error::Numeric(_) => "numeric_error",
            Error::Config(_) => "config_error",
            Error::Io(_) => "io_error",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
