use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("structure: {0}")]
    Structure(String),

    #[error("eigen-solver: {0}")]
    Eigen(String),

    #[error("capacity: {0}")]
    Capacity(String),

    #[error("domain: {0}")]
    Domain(String),

    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("counting: {0}")]
    Counting(String),

    #[error("expansion: {0}")]
    Expansion(String),

    #[error("synthesis: {0}")]
    Synthesis(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable code used in `error,<code>,<message>` lines.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Graph(_) => "graph",
            Error::Structure(_) => "structure",
            Error::Eigen(_) => "eigen",
            Error::Capacity(_) => "capacity",
            Error::Domain(_) => "domain",
            Error::Degenerate(_) => "degenerate",
            Error::Counting(_) => "counting",
            Error::Expansion(_) => "expansion",
            Error::Synthesis(_) => "synthesis",
            Error::Io(_) => "io",
        }
    }
}
