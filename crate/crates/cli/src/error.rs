use carnot_core::algebra::AlgebraError;
use carnot_core::group::GroupError;
use carnot_core::numerics::NumericsError;
use carnot_core::rumin::RuminError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("identity check failed: {0}")]
    Identity(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("usage: {0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Identity(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Usage(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Identity(_) => "identity",
            CliError::Numeric(_) => "numeric",
            CliError::Usage(_) => "usage",
        }
    }
}

impl From<AlgebraError> for CliError {
    fn from(e: AlgebraError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<RuminError> for CliError {
    fn from(e: RuminError) -> Self {
        CliError::Identity(e.to_string())
    }
}

impl From<GroupError> for CliError {
    fn from(e: GroupError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<NumericsError> for CliError {
    fn from(e: NumericsError) -> Self {
        match e {
            NumericsError::InvalidExponent(_) | NumericsError::InvalidConfig(_) | NumericsError::UnsupportedGroup(_) => {
                CliError::Usage(e.to_string())
            }
            NumericsError::Rumin(r) => r.into(),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}
