//! In-memory representation of coreference-annotated documents.
//!
//! A [`Document`] holds tokenised sentences with their morphosyntactic and
//! named-entity annotation, plus a list of [`Cluster`]s. Mentions are
//! positional token spans; two mentions with the same surface text are still
//! distinct mentions.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};

pub type ClusterId = u32;

/// Head of a dependency relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DepHead {
    Root,
    /// 0-based index of the head token within the same sentence.
    Token(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub sentence_index: usize,
    pub token_index: usize,
    pub form: String,
    pub lemma: String,
    pub pos: String,
    /// Pipe-separated `Key=Value` pairs; empty when the token has no features.
    pub feats: String,
    pub dep_head: DepHead,
    pub dep_rel: String,
    pub ner: String,
}

impl Token {
    /// Creates a token with placeholder annotation: the lemma is the
    /// lowercased form, POS `X`, no features, attached to the root, NER `O`.
    pub fn new(sentence_index: usize, token_index: usize, form: impl Into<String>) -> Self {
        let form = form.into();
        Token {
            sentence_index,
            token_index,
            lemma: form.to_lowercase(),
            form,
            pos: "X".to_owned(),
            feats: String::new(),
            dep_head: DepHead::Root,
            dep_rel: "root".to_owned(),
            ner: "O".to_owned(),
        }
    }

    pub fn with_lemma(mut self, lemma: impl Into<String>) -> Self {
        self.lemma = lemma.into();
        self
    }

    pub fn with_pos(mut self, pos: impl Into<String>) -> Self {
        self.pos = pos.into();
        self
    }

    pub fn with_feats(mut self, feats: impl Into<String>) -> Self {
        self.feats = feats.into();
        self
    }

    pub fn with_head(mut self, head: DepHead, rel: impl Into<String>) -> Self {
        self.dep_head = head;
        self.dep_rel = rel.into();
        self
    }

    pub fn with_ner(mut self, ner: impl Into<String>) -> Self {
        self.ner = ner.into();
        self
    }

    /// Iterates over `(key, value)` feature pairs. Entries without `=` are
    /// yielded with an empty value.
    pub fn features(&self) -> impl Iterator<Item = (&str, &str)> {
        self.feats
            .split('|')
            .filter(|f| !f.is_empty())
            .map(|f| f.split_once('=').unwrap_or((f, "")))
    }

    pub fn has_feature(&self, key: &str, value: &str) -> bool {
        self.features().any(|(k, v)| k == key && v == value)
    }
}

/// A mention: an inclusive token range inside one sentence.
///
/// The derived ordering is document order: `(sentence_index, start, end)`
/// lexicographically, so of two nested spans sharing a start the shorter one
/// comes first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MentionSpan {
    pub sentence_index: usize,
    pub start: usize,
    pub end: usize,
}

impl MentionSpan {
    pub fn new(sentence_index: usize, start: usize, end: usize) -> Self {
        MentionSpan {
            sentence_index,
            start,
            end,
        }
    }

    pub fn single(sentence_index: usize, token_index: usize) -> Self {
        Self::new(sentence_index, token_index, token_index)
    }

    /// Token count; a span always covers at least one token.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_single_token(&self) -> bool {
        self.start == self.end
    }

    pub fn covers(&self, sentence_index: usize, token_index: usize) -> bool {
        self.sentence_index == sentence_index
            && self.start <= token_index
            && token_index <= self.end
    }
}

impl fmt::Display for MentionSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}-{}", self.sentence_index, self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub id: ClusterId,
    /// Sorted in document order, without duplicates.
    pub mentions: Vec<MentionSpan>,
}

impl Cluster {
    /// Builds a cluster, sorting the mentions into document order.
    ///
    /// Fails on an empty mention list or a repeated span.
    pub fn new(id: ClusterId, mentions: impl IntoIterator<Item = MentionSpan>) -> Result<Self> {
        let mut mentions: Vec<MentionSpan> = mentions.into_iter().collect();
        mentions.sort();
        if mentions.is_empty() {
            return Err(Error::InvalidCorpus(format!(
                "cluster {id} has no mentions"
            )));
        }
        if let Some(w) = mentions.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidCorpus(format!(
                "cluster {id} contains span {} twice",
                w[0]
            )));
        }
        Ok(Cluster { id, mentions })
    }

    pub fn len(&self) -> usize {
        self.mentions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mentions.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.mentions.len() == 1
    }

    pub fn position(&self, span: &MentionSpan) -> Option<usize> {
        self.mentions.binary_search(span).ok()
    }

    pub fn contains(&self, span: &MentionSpan) -> bool {
        self.position(span).is_some()
    }

    /// Mentions of this cluster strictly preceding `of`, in document order.
    pub fn antecedents(&self, of: &MentionSpan) -> Result<&[MentionSpan]> {
        match self.position(of) {
            Some(idx) => Ok(&self.mentions[..idx]),
            None => Err(Error::NotAMember {
                cluster: self.id,
                span: *of,
            }),
        }
    }
}

/// Returns all mentions of `cluster` that precede `of`.
pub fn antecedents(cluster: &Cluster, of: &MentionSpan) -> Result<Vec<MentionSpan>> {
    cluster.antecedents(of).map(<[_]>::to_vec)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Vec<Token>>,
    pub clusters: Vec<Cluster>,
}

impl Document {
    /// Builds and validates a document. Clusters are ordered by id.
    pub fn new(
        id: impl Into<String>,
        sentences: Vec<Vec<Token>>,
        mut clusters: Vec<Cluster>,
    ) -> Result<Self> {
        clusters.sort_by_key(|c| c.id);
        let doc = Document {
            id: id.into(),
            sentences,
            clusters,
        };
        doc.validate()?;
        Ok(doc)
    }

    /// Checks the structural invariants and returns non-fatal warnings.
    ///
    /// Identical spans in different clusters are reported as warnings; they
    /// occur in real annotation and the rest of the toolkit tolerates them.
    pub fn validate(&self) -> Result<Vec<String>> {
        let invalid = |message: String| Error::InvalidDocument {
            document: self.id.clone(),
            message,
        };

        if self.id.trim().is_empty() {
            return Err(invalid("document id is empty".into()));
        }
        for (s, sentence) in self.sentences.iter().enumerate() {
            if sentence.is_empty() {
                return Err(invalid(format!("sentence {s} is empty")));
            }
            for (t, token) in sentence.iter().enumerate() {
                if token.sentence_index != s || token.token_index != t {
                    return Err(invalid(format!(
                        "token at ({s}, {t}) carries coordinates ({}, {})",
                        token.sentence_index, token.token_index
                    )));
                }
                if token.form.is_empty() {
                    return Err(invalid(format!("token ({s}, {t}) has an empty form")));
                }
                if let DepHead::Token(h) = token.dep_head {
                    if h >= sentence.len() {
                        return Err(invalid(format!(
                            "token ({s}, {t}) has head {h} outside its sentence"
                        )));
                    }
                }
            }
        }

        let mut ids = HashSet::new();
        let mut owners: HashMap<MentionSpan, ClusterId> = HashMap::new();
        let mut warnings = Vec::new();
        for cluster in &self.clusters {
            if !ids.insert(cluster.id) {
                return Err(invalid(format!("duplicate cluster id {}", cluster.id)));
            }
            if cluster.mentions.is_empty() {
                return Err(invalid(format!("cluster {} has no mentions", cluster.id)));
            }
            if cluster.mentions.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid(format!(
                    "mentions of cluster {} are not sorted and unique",
                    cluster.id
                )));
            }
            for span in &cluster.mentions {
                let len = self
                    .sentences
                    .get(span.sentence_index)
                    .map(Vec::len)
                    .ok_or_else(|| invalid(format!("span {span} refers to a missing sentence")))?;
                if span.start > span.end || span.end >= len {
                    return Err(invalid(format!("span {span} is outside its sentence")));
                }
                if let Some(other) = owners.insert(*span, cluster.id) {
                    warnings.push(format!(
                        "span {span} appears in clusters {other} and {}",
                        cluster.id
                    ));
                }
            }
        }
        Ok(warnings)
    }

    pub fn token(&self, sentence_index: usize, token_index: usize) -> Option<&Token> {
        self.sentences.get(sentence_index)?.get(token_index)
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flatten()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    pub fn cluster(&self, id: ClusterId) -> Option<&Cluster> {
        self.clusters.iter().find(|c| c.id == id)
    }

    /// All `(cluster id, span)` pairs whose span covers the given token,
    /// innermost (shortest) first.
    pub fn mention_containing(
        &self,
        sentence_index: usize,
        token_index: usize,
    ) -> Result<Vec<(ClusterId, MentionSpan)>> {
        if self.token(sentence_index, token_index).is_none() {
            return Err(Error::OutOfBounds {
                sentence: sentence_index,
                token: token_index,
            });
        }
        let mut hits: Vec<(ClusterId, MentionSpan)> = self
            .clusters
            .iter()
            .flat_map(|c| c.mentions.iter().map(move |m| (c.id, *m)))
            .filter(|(_, m)| m.covers(sentence_index, token_index))
            .collect();
        hits.sort_by_key(|(id, m)| (m.len(), m.start, *id));
        Ok(hits)
    }

    /// Lowest-id cluster containing exactly this span.
    pub fn cluster_of(&self, span: &MentionSpan) -> Option<&Cluster> {
        self.clusters.iter().find(|c| c.contains(span))
    }

    pub fn span_forms(&self, span: &MentionSpan) -> Vec<&str> {
        self.sentences
            .get(span.sentence_index)
            .map(|s| {
                s[span.start..=span.end]
                    .iter()
                    .map(|t| t.form.as_str())
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Sentence rendered as plain text. Closing punctuation attaches to the
    /// preceding token and opening brackets to the following one.
    pub fn sentence_text(&self, sentence_index: usize) -> String {
        let mut out = String::new();
        let mut glue_next = true;
        for token in self.sentences.get(sentence_index).into_iter().flatten() {
            let form = token.form.as_str();
            let closing = form.chars().all(|c| ".,;:!?)]}%".contains(c));
            if !glue_next && !closing {
                out.push(' ');
            }
            out.push_str(form);
            glue_next = form.chars().all(|c| "([{".contains(c));
        }
        out
    }

    pub fn text(&self) -> String {
        (0..self.sentences.len())
            .map(|s| self.sentence_text(s))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Free-function form of [`Document::mention_containing`].
pub fn mention_containing(
    doc: &Document,
    sentence_index: usize,
    token_index: usize,
) -> Result<Vec<(ClusterId, MentionSpan)>> {
    doc.mention_containing(sentence_index, token_index)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub split_label: Option<String>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Result<Self> {
        let corpus = Corpus {
            documents,
            split_label: None,
        };
        corpus.check_unique_ids()?;
        Ok(corpus)
    }

    pub fn with_split_label(mut self, label: impl Into<String>) -> Self {
        self.split_label = Some(label.into());
        self
    }

    pub fn check_unique_ids(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for doc in &self.documents {
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::InvalidCorpus(format!(
                    "duplicate document id `{}`",
                    doc.id
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.documents.iter().map(Document::token_count).sum()
    }

    /// Applies `f` to every document, in parallel, preserving order.
    pub fn map_documents<F>(&self, f: F) -> Corpus
    where
        F: Fn(&Document) -> Document + Sync + Send,
    {
        use rayon::prelude::*;
        Corpus {
            documents: self.documents.par_iter().map(f).collect(),
            split_label: self.split_label.clone(),
        }
    }
}
