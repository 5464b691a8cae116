use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("regime precondition not met: {0}")]
    Regime(String),
    #[error("{0}")]
    Analysis(#[from] animfa::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Integration(_) => 3,
            CliError::Regime(_) => 4,
            CliError::Analysis(e) => match e {
                animfa::Error::NotHurwitz { .. } | animfa::Error::NotSaddle { .. } => 4,
                _ => 2,
            },
            CliError::Io(_) => 1,
        }
    }
}
