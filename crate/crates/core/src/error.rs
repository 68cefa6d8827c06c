use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("{0}")]
    Domain(String),

    /// Adaptive quadrature hit its subdivision limit before reaching the
    /// requested tolerance.
    #[error("quadrature did not converge: estimate {estimate:e}, achieved error {achieved:e}, requested {requested:e}")]
    Quadrature {
        estimate: f64,
        achieved: f64,
        requested: f64,
    },

    #[error("{}", format_config(.line, .message))]
    Config { line: Option<usize>, message: String },

    #[error("unknown preset '{name}' (valid: {})", .valid.join(", "))]
    UnknownPreset { name: String, valid: Vec<String> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_config(line: &Option<usize>, message: &str) -> String {
    match line {
        Some(line) => format!("line {line}: {message}"),
        None => message.to_string(),
    }
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Config {
            line,
            message: msg.into(),
        }
    }

    /// Stable machine-parsable prefix used by the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "E_DOMAIN",
            Error::Quadrature { .. } => "E_QUADRATURE",
            Error::Config { .. } => "E_CONFIG",
            Error::UnknownPreset { .. } => "E_PRESET",
            Error::Io(_) => "E_IO",
            Error::Json(_) => "E_IO",
        }
    }
}
