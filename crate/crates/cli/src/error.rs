use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numerical validation failed: {0}")]
    Numerical(torsion_core::Error),

    #[error("{0} invariant checks failed")]
    ChecksFailed(usize),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::ChecksFailed(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<torsion_core::Error> for CliError {
    fn from(e: torsion_core::Error) -> Self {
        use torsion_core::Error as E;
        match e {
            E::InvalidGrid(_) | E::InvalidExponent(_) | E::ShapeMismatch { .. } => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
