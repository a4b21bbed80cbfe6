use stable_extrap::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Io(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::Usage(_) | CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Factorization { .. } | Error::NotSymmetric { .. } | Error::NotSquare { .. } => {
                CliError::Solver(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}
