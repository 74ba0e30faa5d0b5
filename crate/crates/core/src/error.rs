use thiserror::Error;

use crate::conll::ParseDiagnostic;
use crate::model::{ClusterId, MentionSpan};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("mention {span} is not a member of cluster {cluster}")]
    NotAMember {
        cluster: ClusterId,
        span: MentionSpan,
    },

    #[error("token ({sentence}, {token}) is out of range")]
    OutOfBounds { sentence: usize, token: usize },

    #[error("invalid document `{document}`: {message}")]
    InvalidDocument { document: String, message: String },

    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),

    #[error("input contains no parseable documents")]
    EmptyCorpus { diagnostics: Vec<ParseDiagnostic> },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid pronoun paradigm `{0}`: all forms must be non-empty")]
    InvalidParadigm(String),

    #[error("invalid lexicon: {0}")]
    InvalidLexicon(String),

    #[error("unknown pronoun paradigm `{0}`")]
    UnknownParadigm(String),

    #[error("invalid fraction `{0}`: expected a value in (0, 1]")]
    InvalidFraction(String),

    #[error("partition size rounds to {size} documents for a corpus of {corpus_size}")]
    DegenerateFraction { size: usize, corpus_size: usize },

    #[error("document ids do not align (missing in prediction: {missing_in_pred:?}; missing in gold: {missing_in_gold:?})")]
    Alignment {
        missing_in_pred: Vec<String>,
        missing_in_gold: Vec<String>,
    },

    #[error("gold and predicted token grids differ in document `{0}`")]
    GridMismatch(String),

    #[error("empty input")]
    EmptyInput,
}
