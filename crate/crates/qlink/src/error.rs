use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("{context}: {source}")]
    Numerical { context: String, source: qlink_core::Error },

    #[error("invariant violated: {}", .0.join("; "))]
    Invariant(Vec<String>),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    /// Process exit code: 2 for configuration problems, 3 for numerical
    /// failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical { source: qlink_core::Error::SectorOverflow { .. }, .. } => 2,
            Self::Numerical { .. } | Self::Invariant(_) => 3,
            Self::Io(_) | Self::Output(_) => 1,
        }
    }

    pub(crate) fn numerical(context: impl Into<String>) -> impl FnOnce(qlink_core::Error) -> Self {
        let context = context.into();
        move |source| Self::Numerical { context, source }
    }
}

impl From<qlink_core::Error> for CliError {
    fn from(source: qlink_core::Error) -> Self {
        Self::Numerical { context: "model".into(), source }
    }
}
