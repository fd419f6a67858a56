use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid template {pattern:?}: {reason}")]
    InvalidTemplate { pattern: String, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {message}", location(.path, *.line))]
    Data {
        path: Option<PathBuf>,
        line: Option<usize>,
        message: String,
    },

    #[error("unsupported corpus: {0}")]
    UnsupportedCorpus(String),

    #[error("incomplete judgments: no judgment for question {question_id:?} rank {rank}")]
    IncompleteJudgments { question_id: String, rank: u32 },

    #[error("rule {0} is applied at matching time, not during normalization")]
    OutOfModuleRule(u8),

    #[error("request to {endpoint} failed after {attempts} attempt(s): {message}")]
    Retryable {
        endpoint: String,
        attempts: u32,
        message: String,
    },

    #[error("tagger training failed in round {round}: {message}")]
    Tagger { round: usize, message: String },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn location(path: &Option<PathBuf>, line: Option<usize>) -> String {
    match (path, line) {
        (Some(p), Some(l)) => format!("data error at {}:{l}", p.display()),
        (Some(p), None) => format!("data error in {}", p.display()),
        (None, Some(l)) => format!("data error at line {l}"),
        (None, None) => "data error".to_string(),
    }
}

impl Error {
    pub fn data(message: impl Into<String>) -> Self {
        Error::Data {
            path: None,
            line: None,
            message: message.into(),
        }
    }

    pub fn data_at(line: usize, message: impl Into<String>) -> Self {
        Error::Data {
            path: None,
            line: Some(line),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach a file path to a data error that only knows its line.
    pub fn in_file(self, file: impl Into<PathBuf>) -> Self {
        match self {
            Error::Data {
                path: None,
                line,
                message,
            } => Error::Data {
                path: Some(file.into()),
                line,
                message,
            },
            other => other,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Process exit code: 1 validation/config, 2 data, 3 internal invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::InvalidTemplate { .. }
            | Error::Config(_)
            | Error::OutOfModuleRule(_) => 1,
            Error::Invariant(_) => 3,
            Error::Stage { source, .. } => source.exit_code(),
            Error::Data { .. }
            | Error::UnsupportedCorpus(_)
            | Error::IncompleteJudgments { .. }
            | Error::Retryable { .. }
            | Error::Tagger { .. }
            | Error::Io { .. } => 2,
        }
    }
}
