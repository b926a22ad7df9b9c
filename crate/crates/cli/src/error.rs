use std::path::{Path, PathBuf};

use convergence_core::ErrorKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("{}: {message}", path.display())]
    Config { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] convergence_core::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn parse(path: &Path, line: u64, message: impl Into<String>) -> Self {
        CliError::Parse {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => EXIT_USAGE,
            CliError::Io { .. } | CliError::Parse { .. } => EXIT_DATA,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Data => EXIT_DATA,
                ErrorKind::InvalidArgument => EXIT_USAGE,
                ErrorKind::Numerical => EXIT_NUMERICAL,
            },
        }
    }

    /// Where the failure came from: a core module name, or the front-end stage.
    pub fn module(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config { .. } => "config",
            CliError::Io { .. } | CliError::Parse { .. } => "io",
            CliError::Core(e) => e.module(),
        }
    }

    /// One line suitable for stderr.
    pub fn diagnostic(&self) -> String {
        let message = self.to_string();
        let message: Vec<&str> = message.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        format!("error[{}]: {}", self.module(), message.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use convergence_core::Error;

    #[test]
    fn exit_codes_follow_error_kind() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), EXIT_USAGE);
        assert_eq!(CliError::from(Error::EmptyPanel).exit_code(), EXIT_DATA);
        assert_eq!(CliError::from(Error::UnidentifiedBeta).exit_code(), EXIT_NUMERICAL);
        assert_eq!(CliError::from(Error::AlphaOutOfRange(1.5)).exit_code(), EXIT_USAGE);
    }

    #[test]
    fn diagnostic_is_one_line_with_provenance() {
        let d = CliError::from(Error::NoConvergence { iterations: 200 }).diagnostic();
        assert!(d.starts_with("error[convergence]: "), "{d}");
        assert!(!d.contains('\n'));
        let d = CliError::Usage("line one\n\n  line two".into()).diagnostic();
        assert_eq!(d, "error[usage]: line one line two");
    }
}
