use std::path::PathBuf;

pub type Result<T, E = AncError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum AncError {
    #[error(transparent)]
    Core(#[from] anc_core::Error),
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    NotNumeric {
        row: u64,
        column: String,
        value: String,
    },
    #[error(
        "game {game_id} at {elapsed_seconds} s: player {player} is listed twice on the {side} side"
    )]
    DuplicatePlayer {
        game_id: String,
        elapsed_seconds: f64,
        side: &'static str,
        player: String,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Invalid(String),
}

impl AncError {
    /// 2 for problems with the caller's inputs, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            AncError::Io(_) => 1,
            AncError::File { source, .. } if source.kind() != std::io::ErrorKind::NotFound => 1,
            _ => 2,
        }
    }

    pub fn file(path: impl Into<PathBuf>, source: std::io::Error) -> AncError {
        AncError::File {
            path: path.into(),
            source,
        }
    }
}
