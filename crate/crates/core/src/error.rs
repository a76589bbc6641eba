use std::path::PathBuf;

use crate::entity::EntityId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("duplicate coordinate ({row}, {col})")]
    DuplicateCoordinate { row: String, col: String },

    #[error("non-finite value {value} at ({row}, {col})")]
    NonFiniteValue { row: String, col: String, value: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("row count mismatch: {left} vs {right}")]
    RowCountMismatch { left: usize, right: usize },

    #[error("unknown entity {0}")]
    UnknownEntity(EntityId),

    #[error("slave {slave} did not reply within the iteration barrier")]
    MissingSlaveReply { slave: String },

    #[error("slave {slave} received a vector for unshared entity {entity}")]
    UnknownEntityInMessage { slave: String, entity: EntityId },

    #[error("empty input")]
    EmptyInput,

    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("cannot access {}", path.display())]
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
