use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("failed to parse {path}: {message}")]
    Parse { path: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("discretization: {0}")]
    Discretization(String),

    #[error("value {value} outside discretization range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("model build: {0}")]
    Build(String),

    #[error("solver backend unavailable: {0}")]
    BackendUnavailable(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("plan rejected: {0}")]
    Plan(String),

    #[error("simulation: {0}")]
    Simulation(String),

    #[error("rolling step {step}: {message}")]
    Rolling { step: usize, message: String },

    #[error("{0}")]
    Config(String),
}

impl Error {
    /// The model (or a rolling step) has no feasible solution.
    pub fn is_infeasible(&self) -> bool {
        match self {
            Error::Infeasible(_) => true,
            Error::Rolling { message, .. } => message.starts_with("no solution (infeasible)"),
            _ => false,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
