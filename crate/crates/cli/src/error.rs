use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}", config_message(.line, .key, .msg))]
    Config { line: Option<usize>, key: String, msg: String },

    #[error("usage: {0}")]
    Usage(String),

    #[error("[{module}] {source}")]
    Runtime { module: &'static str, source: ksring::Error },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn config_message(line: &Option<usize>, key: &str, msg: &str) -> String {
    match line {
        Some(n) => format!("config error at line {n}, key `{key}`: {msg}"),
        None => format!("config error, key `{key}`: {msg}"),
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) => 2,
            CliError::Runtime { .. } | CliError::Io(_) => 1,
        }
    }
}

/// Tags a core error with the module that raised it.
pub trait Tag<T> {
    fn tag(self, module: &'static str) -> Result<T, CliError>;
}

impl<T> Tag<T> for ksring::Result<T> {
    fn tag(self, module: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Runtime { module, source })
    }
}
