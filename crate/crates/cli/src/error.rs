use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("unsupported instance: {0}")]
    Unsupported(String),
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    /// Process exit code: 2 for configuration problems, 3 for everything
    /// that went wrong while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Unsupported(_) => 2,
            HarnessError::Runtime(_) | HarnessError::Io { .. } => 3,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.as_ref().display().to_string(), source }
    }
}

impl From<mirror_polyak::Error> for HarnessError {
    fn from(e: mirror_polyak::Error) -> Self {
        match e {
            mirror_polyak::Error::Construction(msg) => HarnessError::Config(msg),
            other => HarnessError::Runtime(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
