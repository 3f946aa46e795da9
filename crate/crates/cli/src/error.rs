use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numerics error: {0}")]
    Numerics(noisy_rf::Error),

    #[error("oracle check failed: {0}")]
    OracleFailure(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Numerics(_) => 3,
            CliError::OracleFailure(_) => 4,
        }
    }
}

/// Bad parameter values reached through sweeps are configuration mistakes;
/// everything else the library reports is numerical.
impl From<noisy_rf::Error> for CliError {
    fn from(e: noisy_rf::Error) -> Self {
        match e {
            noisy_rf::Error::InvalidParameter(msg) => CliError::Config(msg),
            other => CliError::Numerics(other),
        }
    }
}
