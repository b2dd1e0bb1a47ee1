use thiserror::Error;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_VERDICT: u8 = 1;
pub const EXIT_SCHEMA: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    /// Config text or values that fail validation.
    #[error("config error: {0}")]
    Schema(String),

    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    /// Error tied to a field path and a line of the config file.
    pub fn schema_at(line: usize, path: &str, message: impl std::fmt::Display) -> Self {
        let place = if path.is_empty() {
            format!("line {line}")
        } else {
            format!("{path} (line {line})")
        };
        CliError::Schema(format!("{place}: {message}"))
    }

    pub fn schema(path: &str, message: impl std::fmt::Display) -> Self {
        CliError::Schema(format!("{path}: {message}"))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Schema(_) => EXIT_SCHEMA,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<kpplab_core::Error> for CliError {
    fn from(e: kpplab_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
