use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] fronthaul::Error),

    #[error("scenario {name}: {source}")]
    Scenario { name: String, source: Box<CliError> },
}

impl CliError {
    pub fn context(self, name: &str) -> CliError {
        CliError::Scenario { name: name.to_string(), source: Box::new(self) }
    }

    /// 2 for an infeasible channel, 3 for solver non-convergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(fronthaul::Error::InfeasibleChannel) => 2,
            CliError::Core(fronthaul::Error::NonConvergence { .. }) => 3,
            CliError::Scenario { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}
