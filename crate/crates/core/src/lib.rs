//! Toolkit for building gender-inclusive variants of coreference corpora and
//! for evaluating resolvers on them.
//!
//! The pieces, bottom-up:
//!
//! - [`model`]: documents, tokens, mention spans and clusters.
//! - [`conll`]: the tab-separated corpus format with coreference brackets.
//! - [`lexicon`]: pronoun paradigms and the gendered-noun rewrite table.
//! - [`transform`]: pronoun swapping, delexicalisation, name anonymisation
//!   and noun neutralisation.
//! - [`dataset`]: augmented, sampled and unseen-pronoun corpus variants.
//! - [`metrics`]: LEA and the pronoun score.
//! - [`stats`]: pronoun frequency tables.
//! - [`resolver`]: a small rule-based resolver for end-to-end runs.

pub mod conll;
pub mod dataset;
pub mod error;
pub mod lexicon;
pub mod metrics;
pub mod model;
pub mod resolver;
pub mod stats;
pub mod transform;

pub use conll::{
    parse_corpus, parse_corpus_str, serialize_corpus, strip_singletons, ParseDiagnostic, Severity,
};
pub use error::{Error, Result};
pub use lexicon::{builtin_noun_lexicon, paradigm, PronounParadigm, RewriteLexicon};
pub use metrics::{evaluate, lea, pronoun_score, EvalOptions, EvalReport, LeaScore};
pub use model::{Cluster, ClusterId, Corpus, DepHead, Document, MentionSpan, Token};
pub use resolver::{resolve, ResolverConfig};
pub use transform::{classify_pronoun, ClassifierConfig, PronounRole, TransformOptions};
