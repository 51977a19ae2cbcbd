use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("empty audio: {0}")]
    EmptyAudio(PathBuf),
    #[error("{path}: unsupported WAV encoding ({detail})")]
    UnsupportedEncoding { path: PathBuf, detail: String },
    #[error("{path}: unreadable WAV: {detail}")]
    Wav { path: PathBuf, detail: String },
    #[error("{what}: {detail}")]
    Format { what: &'static str, detail: String },
    #[error(transparent)]
    Core(#[from] daisy_core::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn format(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Format { what, detail: detail.into() }
    }
}
