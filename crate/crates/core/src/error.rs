use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while reading or writing archive data.
#[derive(Debug, Error)]
pub enum ArchiveError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt record in {path} at offset {offset}: {reason}")]
    CorruptRecord {
        path: PathBuf,
        offset: u64,
        reason: String,
    },
    #[error("malformed index line {line}: {reason}")]
    MalformedIndex { line: usize, reason: String },
    #[error("indexed WARC file does not exist: {0}")]
    MissingWarc(PathBuf),
}

impl ArchiveError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ArchiveError::Io {
            path: path.into(),
            source,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UrlError {
    #[error("unparseable url {url:?}: {reason}")]
    Unparseable { url: String, reason: String },
    #[error("relative url {0:?} without a base")]
    RelativeWithoutBase(String),
    #[error("unsupported scheme {0:?}")]
    UnsupportedScheme(String),
    #[error("empty url")]
    Empty,
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("spec parse error: {0}")]
    Parse(String),
    #[error("spec validation error: {0}")]
    Invalid(crate::collection_spec::Diagnostic),
    #[error("cannot read spec {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("unknown language code {0:?}")]
    UnknownLanguage(String),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("malformed IDF dictionary line {line}: {reason}")]
    MalformedDictionary { line: usize, reason: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot resolve reference document {reference}: {reason}")]
    UnresolvableReference { reference: String, reason: String },
}

#[derive(Debug, Error)]
pub enum CrawlError {
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Archive(#[from] ArchiveError),
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("mismatched budgets: base {base}, variant {variant}")]
    MismatchedBudgets { base: usize, variant: usize },
    #[error("undefined ratio: base accumulated relevance is zero for {0}")]
    UndefinedRatio(String),
    #[error("checkpoint must be positive")]
    ZeroCheckpoint,
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Crawl(#[from] CrawlError),
    #[error(transparent)]
    Archive(#[from] ArchiveError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
