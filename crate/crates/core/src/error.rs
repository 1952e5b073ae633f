use thiserror::Error;

pub type Result<T> = std::result::Result<T, CcaError>;

#[derive(Debug, Error)]
pub enum CcaError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sector dimension {dimension} exceeds the configured cap of {cap} states")]
    DimensionCap { dimension: u128, cap: usize },

    #[error("sector mismatch: {0}")]
    SectorMismatch(String),

    #[error("cavity index {index} out of range for {cavities} cavities")]
    CavityOutOfRange { index: usize, cavities: usize },

    #[error("oracle limited to {limit} photons, got {photons}")]
    OracleTooLarge { photons: u32, limit: u32 },

    #[error("evolution period unavailable: {0}")]
    PeriodUnavailable(String),

    #[error("numerical guard tripped: {0}")]
    NumericalGuard(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CcaError {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            CcaError::DimensionCap { .. } | CcaError::NumericalGuard(_) => 3,
            CcaError::Io(_) => 1,
            _ => 2,
        }
    }
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(CcaError::InvalidParameter(msg.into()))
}
