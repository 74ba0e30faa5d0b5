//! Token-level rewriting of documents.
//!
//! Every transform here maps a document to a document with the same token
//! grid and the same coreference layer; only `form` and `lemma` change.
//! Pronouns are recognised through the POS and feature columns, driven by a
//! [`ClassifierConfig`], so that homographs such as possessive versus object
//! *haar* or relative *die* are told apart.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lexicon::{match_case, PronounParadigm, RewriteLexicon};
use crate::model::{Document, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PronounRole {
    Subject,
    Object,
    Possessive,
}

impl PronounRole {
    /// Literal placeholder used by delexicalisation.
    pub fn tag(self) -> &'static str {
        match self {
            PronounRole::Subject => "<SUBJ>",
            PronounRole::Object => "<OBJ>",
            PronounRole::Possessive => "<POSS>",
        }
    }
}

/// Grammatical function of a pronoun-like token, regardless of person and
/// number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PronounFunction {
    PersonalSubject,
    PersonalObject,
    Possessive,
    Relative,
    Demonstrative,
    Other,
}

/// A single `Key=Value` morphological feature.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Feature {
    pub key: String,
    pub value: String,
}

impl Feature {
    pub fn new(key: &str, value: &str) -> Self {
        Feature {
            key: key.to_owned(),
            value: value.to_owned(),
        }
    }

    pub fn present_in(&self, token: &Token) -> bool {
        token.has_feature(&self.key, &self.value)
    }
}

impl FromStr for Feature {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().split_once('=') {
            Some((k, v)) if !k.is_empty() && !v.is_empty() => Ok(Feature::new(k, v)),
            _ => Err(format!("expected Key=Value, found `{s}`")),
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.key, self.value)
    }
}

/// Predicate over a token's POS tag and features.
///
/// Matches when the POS is in `pos` (or `pos` is empty), every `require`d
/// feature is present and no `forbid`den feature is.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TagPredicate {
    pub pos: Vec<String>,
    pub require: Vec<Feature>,
    pub forbid: Vec<Feature>,
}

impl TagPredicate {
    pub fn matches(&self, token: &Token) -> bool {
        (self.pos.is_empty() || self.pos.contains(&token.pos))
            && self.require.iter().all(|f| f.present_in(token))
            && !self.forbid.iter().any(|f| f.present_in(token))
    }
}

/// Tagset-specific knowledge needed to find and classify pronouns.
///
/// The default targets Universal Dependencies features. Other tagsets can be
/// described in a `key = value` file, see [`ClassifierConfig::parse`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifierConfig {
    pub personal: TagPredicate,
    pub possessive: TagPredicate,
    pub relative: TagPredicate,
    pub demonstrative: TagPredicate,
    /// Tokens eligible for gendered-noun replacement.
    pub nominal: TagPredicate,
    /// Marks a personal pronoun as subject; otherwise it is an object.
    pub nominative: Feature,
    /// All must be present for a token to count as third-person singular.
    pub third_singular: Vec<Feature>,
    pub masculine: Vec<Feature>,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        let pron = || vec!["PRON".to_owned()];
        ClassifierConfig {
            personal: TagPredicate {
                pos: pron(),
                require: vec![Feature::new("PronType", "Prs")],
                forbid: vec![Feature::new("Poss", "Yes")],
            },
            possessive: TagPredicate {
                pos: vec!["PRON".to_owned(), "DET".to_owned()],
                require: vec![Feature::new("PronType", "Prs"), Feature::new("Poss", "Yes")],
                forbid: vec![],
            },
            relative: TagPredicate {
                pos: vec![],
                require: vec![Feature::new("PronType", "Rel")],
                forbid: vec![],
            },
            demonstrative: TagPredicate {
                pos: vec![],
                require: vec![Feature::new("PronType", "Dem")],
                forbid: vec![],
            },
            nominal: TagPredicate {
                pos: vec!["NOUN".to_owned()],
                require: vec![],
                forbid: vec![],
            },
            nominative: Feature::new("Case", "Nom"),
            third_singular: vec![Feature::new("Person", "3"), Feature::new("Number", "Sing")],
            masculine: vec![Feature::new("Gender", "Masc")],
        }
    }
}

impl ClassifierConfig {
    /// Parses `key = value` lines on top of the defaults.
    ///
    /// Predicate keys are `<name>.pos` (comma-separated tags), `<name>.require`
    /// and `<name>.forbid` (pipe-separated features) for `personal`,
    /// `possessive`, `relative`, `demonstrative` and `nominal`. Plain keys are
    /// `nominative` (one feature), `third_singular` and `masculine` (feature
    /// lists). `#` starts a comment line; an empty value clears a list.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ClassifierConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(format!("expected key = value, found `{line}`")))?;
            let features = |v: &str| -> Result<Vec<Feature>> {
                v.split('|')
                    .filter(|f| !f.trim().is_empty())
                    .map(|f| f.parse().map_err(err))
                    .collect()
            };
            match key.split_once('.') {
                Some((name, field)) => {
                    let predicate = match name {
                        "personal" => &mut cfg.personal,
                        "possessive" => &mut cfg.possessive,
                        "relative" => &mut cfg.relative,
                        "demonstrative" => &mut cfg.demonstrative,
                        "nominal" => &mut cfg.nominal,
                        _ => return Err(err(format!("unknown predicate `{name}`"))),
                    };
                    match field {
                        "pos" => {
                            predicate.pos = value
                                .split(',')
                                .map(str::trim)
                                .filter(|p| !p.is_empty())
                                .map(str::to_owned)
                                .collect()
                        }
                        "require" => predicate.require = features(value)?,
                        "forbid" => predicate.forbid = features(value)?,
                        _ => return Err(err(format!("unknown predicate field `{field}`"))),
                    }
                }
                None => match key {
                    "nominative" => cfg.nominative = value.parse().map_err(err)?,
                    "third_singular" => cfg.third_singular = features(value)?,
                    "masculine" => cfg.masculine = features(value)?,
                    _ => return Err(err(format!("unknown key `{key}`"))),
                },
            }
        }
        Ok(cfg)
    }

    pub fn is_third_singular(&self, token: &Token) -> bool {
        self.third_singular.iter().all(|f| f.present_in(token))
    }

    pub fn is_masculine(&self, token: &Token) -> bool {
        !self.masculine.is_empty() && self.masculine.iter().all(|f| f.present_in(token))
    }

    pub fn is_nominal(&self, token: &Token) -> bool {
        self.nominal.matches(token)
    }

    /// Possessive is checked before personal, then relative, demonstrative.
    pub fn function(&self, token: &Token) -> PronounFunction {
        if self.possessive.matches(token) {
            PronounFunction::Possessive
        } else if self.personal.matches(token) {
            if self.nominative.present_in(token) {
                PronounFunction::PersonalSubject
            } else {
                PronounFunction::PersonalObject
            }
        } else if self.relative.matches(token) {
            PronounFunction::Relative
        } else if self.demonstrative.matches(token) {
            PronounFunction::Demonstrative
        } else {
            PronounFunction::Other
        }
    }
}

/// Role of a third-person singular personal or possessive pronoun, `None`
/// for every other token.
pub fn classify_pronoun(token: &Token, cfg: &ClassifierConfig) -> Option<PronounRole> {
    if !cfg.is_third_singular(token) {
        return None;
    }
    match cfg.function(token) {
        PronounFunction::PersonalSubject => Some(PronounRole::Subject),
        PronounFunction::PersonalObject => Some(PronounRole::Object),
        PronounFunction::Possessive => Some(PronounRole::Possessive),
        _ => None,
    }
}

/// Rebuilds `doc` with `rewrite` applied to each token. `rewrite` returns the
/// new `(form, lemma)` or `None` to keep the token.
fn rewrite_tokens<F>(doc: &Document, mut rewrite: F) -> Document
where
    F: FnMut(&Token) -> Option<(String, String)>,
{
    let sentences = doc
        .sentences
        .iter()
        .map(|sentence| {
            sentence
                .iter()
                .map(|token| match rewrite(token) {
                    Some((form, lemma)) => Token {
                        form,
                        lemma,
                        ..token.clone()
                    },
                    None => token.clone(),
                })
                .collect()
        })
        .collect();
    Document {
        id: doc.id.clone(),
        sentences,
        clusters: doc.clusters.clone(),
    }
}

/// Replaces every third-person singular pronoun with the paradigm's form for
/// its role, keeping the original capitalisation pattern. Features are left
/// alone; they describe the slot, not the word.
pub fn swap_pronouns(
    doc: &Document,
    paradigm: &PronounParadigm,
    cfg: &ClassifierConfig,
) -> Document {
    rewrite_tokens(doc, |token| {
        let target = paradigm.form(classify_pronoun(token, cfg)?);
        Some((match_case(&token.form, target), target.to_owned()))
    })
}

/// Replaces pronoun forms (and lemmas) with `<SUBJ>`, `<OBJ>` or `<POSS>`.
pub fn delexicalize(doc: &Document, cfg: &ClassifierConfig) -> Document {
    rewrite_tokens(doc, |token| {
        let tag = classify_pronoun(token, cfg)?.tag();
        Some((tag.to_owned(), tag.to_owned()))
    })
}

/// Per-document assignment of `ANON_x` indices to name strings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnonymizationMap {
    index: HashMap<String, usize>,
    names: Vec<String>,
}

impl AnonymizationMap {
    /// Index for `name`, assigning the next free one on first sight.
    pub fn assign(&mut self, name: &str) -> usize {
        if let Some(&x) = self.index.get(name) {
            return x;
        }
        let x = self.names.len();
        self.index.insert(name.to_owned(), x);
        self.names.push(name.to_owned());
        x
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Names in index order.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn tag(x: usize) -> String {
        format!("ANON_{x}")
    }
}

pub fn is_anon_tag(form: &str) -> bool {
    form.strip_prefix("ANON_")
        .is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

/// `PER`, `B-PER` and `I-PER` all mark person names.
pub fn is_person_label(ner: &str) -> bool {
    ner == "PER"
        || ner
            .strip_suffix("PER")
            .is_some_and(|p| p == "B-" || p == "I-")
}

/// Replaces each PER-tagged token by `ANON_x`, where `x` is the
/// first-occurrence index of the exact (case-sensitive) form.
pub fn anonymize_names(doc: &Document) -> (Document, AnonymizationMap) {
    let mut map = AnonymizationMap::default();
    let out = rewrite_tokens(doc, |token| {
        if !is_person_label(&token.ner) {
            return None;
        }
        let tag = AnonymizationMap::tag(map.assign(&token.form));
        Some((tag.clone(), tag))
    });
    (out, map)
}

/// Rewrites nominal tokens found in the lexicon to their neutral form.
pub fn replace_nouns(doc: &Document, lex: &RewriteLexicon, cfg: &ClassifierConfig) -> Document {
    rewrite_tokens(doc, |token| {
        if !cfg.is_nominal(token) {
            return None;
        }
        let replacement = lex.lookup(&token.form)?;
        let lemma = replacement.to_lowercase();
        Some((replacement, lemma))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TransformOptions {
    pub anonymize: bool,
    pub neutralize_nouns: bool,
}

impl TransformOptions {
    pub fn all() -> Self {
        TransformOptions {
            anonymize: true,
            neutralize_nouns: true,
        }
    }
}

/// Pronoun swap, then name anonymisation, then noun neutralisation.
///
/// `paradigm = None` keeps the original pronouns, which gives the baseline
/// variant where only the gender cues in names and nouns are removed.
pub fn pronoun_specific(
    doc: &Document,
    paradigm: Option<&PronounParadigm>,
    cfg: &ClassifierConfig,
    lex: &RewriteLexicon,
    options: TransformOptions,
) -> Document {
    let mut out = match paradigm {
        Some(p) => swap_pronouns(doc, p, cfg),
        None => doc.clone(),
    };
    if options.anonymize {
        out = anonymize_names(&out).0;
    }
    if options.neutralize_nouns {
        out = replace_nouns(&out, lex, cfg);
    }
    out
}
