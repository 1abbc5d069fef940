use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid transform size {0}: must be at least 2")]
    InvalidSize(usize),

    #[error("kernel format error at line {line}: {message}")]
    KernelFormat { line: usize, message: String },

    #[error("kernel entry {value} at ({row}, {col}) is outside {{-2, -1, 0, 1, 2}}")]
    KernelDomain { row: usize, col: usize, value: i64 },

    #[error("kernel `{name}` is not orthogonalizable: K·Kᵀ has off-diagonal entry {value} at ({row}, {col})")]
    NotOrthogonalizable {
        name: String,
        row: usize,
        col: usize,
        value: i64,
    },

    #[error("transform `{name}` is not orthonormal: max deviation {deviation:e} from identity")]
    NotOrthonormal { name: String, deviation: f64 },

    #[error("factorization inconsistency: {0}")]
    Factorization(String),

    #[error("{0}")]
    Domain(String),

    #[error("degenerate transform: {0}")]
    Degenerate(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("PGM format error in {path}: {message}")]
    PgmFormat { path: PathBuf, message: String },

    #[error("corpus {0} contains no readable images")]
    EmptyCorpus(PathBuf),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
