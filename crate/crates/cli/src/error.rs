use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("input error: {0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] tml_core::Error),
    #[error("check failed: {0}")]
    Check(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 0 ok, 1 check or numerical failure, 2 usage or input error.
    pub fn exit_code(&self) -> i32 {
        use tml_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Core(E::InvalidInput(_) | E::NotUnimodular(..)) => 2,
            CliError::Core(_) | CliError::Check(_) => 1,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(e.to_string())
    }
}
