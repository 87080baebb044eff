use thiserror::Error;

/// Error taxonomy for the whole toolkit. The CLI maps these onto exit codes,
/// so the variant a failure lands in matters: `Config` is a usage problem,
/// `Data`/`Io`/`Load` are bad inputs, `Numeric` is a diverged computation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {lhs} vs {rhs}")]
    Dimension {
        op: &'static str,
        lhs: String,
        rhs: String,
    },

    #[error("index out of range in {op}: {index} not below {bound}")]
    Index {
        op: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("checkpoint error: {0}")]
    Load(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn dimension(op: &'static str, lhs: (usize, usize), rhs: (usize, usize)) -> Self {
        Error::Dimension {
            op,
            lhs: format!("{}x{}", lhs.0, lhs.1),
            rhs: format!("{}x{}", rhs.0, rhs.1),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
