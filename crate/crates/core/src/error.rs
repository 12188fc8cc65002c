use thiserror::Error;

/// Errors raised anywhere in the level/path pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("format error: {0}")]
    Format(String),
    #[error("unknown tile symbol {symbol:?} at line {line}, column {column}")]
    Symbol {
        symbol: char,
        line: usize,
        column: usize,
    },
    #[error("unknown action symbol {0:?}")]
    ActionSymbol(char),
    #[error("trace error: steps {index} -> {next} are not adjacent")]
    Trace { index: usize, next: usize },
    #[error("path leaves the {width}x{height} grid at ({column}, {row})")]
    Bounds {
        width: usize,
        height: usize,
        column: i64,
        row: i64,
    },
    #[error("corpus error: {0}")]
    Corpus(String),
    #[error("non-finite value during training at epoch {epoch}")]
    Numerics { epoch: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{levels} levels but {paths} paths")]
    Alignment { levels: usize, paths: usize },
    #[error("level structure: {0}")]
    Structure(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("no gold is reachable from the spawn")]
    Solve,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
