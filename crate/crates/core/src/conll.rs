//! Reader and writer for the tab-separated corpus format.
//!
//! ```text
//! #begin document <id>
//! 1<TAB>form<TAB>lemma<TAB>pos<TAB>feats<TAB>head<TAB>deprel<TAB>ner<TAB>coref
//! ...
//! <blank line after every sentence>
//! #end document
//! ```
//!
//! `feats` is `_` when empty, `head` is 1-based with `0` for the root, and the
//! coreference column uses CoNLL-2012 brackets: `(id`, `id)`, `(id)` or `-`,
//! several entries joined by `|`. Serialisation writes opening brackets,
//! then single-token mentions, then closing brackets, each in ascending id
//! order. An optional `#split <label>` line before the first document carries
//! the corpus split label.
//!
//! Parsing recovers per document: a malformed document is reported and
//! dropped, the rest of the corpus is kept.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::model::{Cluster, ClusterId, Corpus, DepHead, Document, MentionSpan, Token};

const BEGIN: &str = "#begin document";
const END: &str = "#end document";
const SPLIT: &str = "#split";
const COLUMNS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    /// 1-based input line.
    pub line_number: usize,
    pub severity: Severity,
    pub message: String,
}

impl ParseDiagnostic {
    fn error(line_number: usize, message: impl Into<String>) -> Self {
        ParseDiagnostic {
            line_number,
            severity: Severity::Error,
            message: message.into(),
        }
    }

    fn warning(line_number: usize, message: impl Into<String>) -> Self {
        ParseDiagnostic {
            line_number,
            severity: Severity::Warning,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let severity = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "line {}: {}: {}",
            self.line_number, severity, self.message
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bracket {
    Open(ClusterId),
    Close(ClusterId),
    Single(ClusterId),
}

fn parse_coref_field(field: &str) -> std::result::Result<Vec<Bracket>, String> {
    if field == "-" {
        return Ok(Vec::new());
    }
    let parse_id = |s: &str| -> std::result::Result<ClusterId, String> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("malformed coreference entry in `{field}`"));
        }
        s.parse()
            .map_err(|_| format!("cluster id out of range in `{field}`"))
    };
    field
        .split('|')
        .map(|entry| {
            let (open, rest) = entry
                .strip_prefix('(')
                .map_or((false, entry), |r| (true, r));
            let (close, inner) = rest.strip_suffix(')').map_or((false, rest), |r| (true, r));
            match (open, close) {
                (true, true) => parse_id(inner).map(Bracket::Single),
                (true, false) => parse_id(inner).map(Bracket::Open),
                (false, true) => parse_id(inner).map(Bracket::Close),
                (false, false) => Err(format!("malformed coreference entry `{entry}`")),
            }
        })
        .collect()
}

/// Accumulates one document while its lines are read.
struct DocBuilder {
    id: String,
    begin_line: usize,
    sentences: Vec<Vec<Token>>,
    current: Vec<Token>,
    current_lines: Vec<usize>,
    open: HashMap<ClusterId, Vec<(usize, usize)>>,
    mentions: BTreeMap<ClusterId, Vec<(MentionSpan, usize)>>,
    failed: bool,
}

impl DocBuilder {
    fn new(id: String, begin_line: usize) -> Self {
        DocBuilder {
            id,
            begin_line,
            sentences: Vec::new(),
            current: Vec::new(),
            current_lines: Vec::new(),
            open: HashMap::new(),
            mentions: BTreeMap::new(),
            failed: false,
        }
    }

    fn token_line(
        &mut self,
        line: &str,
        line_number: usize,
    ) -> std::result::Result<(), ParseDiagnostic> {
        let err = |m: String| ParseDiagnostic::error(line_number, m);
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != COLUMNS {
            return Err(err(format!(
                "expected {COLUMNS} tab-separated columns, found {}",
                cols.len()
            )));
        }
        if let Some(i) = cols.iter().position(|c| c.is_empty()) {
            return Err(err(format!("column {} is empty", i + 1)));
        }
        let token_index = self.current.len();
        match cols[0].parse::<usize>() {
            Ok(n) if n == token_index + 1 => {}
            _ => {
                return Err(err(format!(
                    "expected token index {}, found `{}`",
                    token_index + 1,
                    cols[0]
                )))
            }
        }
        let dep_head = match cols[5].parse::<usize>() {
            Ok(0) => DepHead::Root,
            Ok(h) => DepHead::Token(h - 1),
            Err(_) => return Err(err(format!("malformed dependency head `{}`", cols[5]))),
        };
        let brackets = parse_coref_field(cols[8]).map_err(err)?;
        let sentence_index = self.sentences.len();
        for bracket in brackets {
            match bracket {
                Bracket::Open(id) => self
                    .open
                    .entry(id)
                    .or_default()
                    .push((token_index, line_number)),
                Bracket::Single(id) => self.mentions.entry(id).or_default().push((
                    MentionSpan::single(sentence_index, token_index),
                    line_number,
                )),
                Bracket::Close(id) => {
                    let (start, start_line) =
                        self.open.get_mut(&id).and_then(Vec::pop).ok_or_else(|| {
                            err(format!("closing bracket `{id})` has no matching `({id}`"))
                        })?;
                    self.mentions.entry(id).or_default().push((
                        MentionSpan::new(sentence_index, start, token_index),
                        start_line,
                    ));
                }
            }
        }
        self.current.push(Token {
            sentence_index,
            token_index,
            form: cols[1].to_owned(),
            lemma: cols[2].to_owned(),
            pos: cols[3].to_owned(),
            feats: if cols[4] == "_" {
                String::new()
            } else {
                cols[4].to_owned()
            },
            dep_head,
            dep_rel: cols[6].to_owned(),
            ner: cols[7].to_owned(),
        });
        self.current_lines.push(line_number);
        Ok(())
    }

    fn end_sentence(&mut self) -> std::result::Result<(), ParseDiagnostic> {
        if self.current.is_empty() {
            return Ok(());
        }
        let len = self.current.len();
        for (token, &line) in self.current.iter().zip(&self.current_lines) {
            if let DepHead::Token(h) = token.dep_head {
                if h >= len {
                    return Err(ParseDiagnostic::error(
                        line,
                        format!("dependency head {} exceeds sentence length {len}", h + 1),
                    ));
                }
            }
        }
        let unclosed = self
            .open
            .iter()
            .flat_map(|(id, stack)| stack.iter().map(move |(_, line)| (*line, *id)))
            .min();
        if let Some((line, id)) = unclosed {
            return Err(ParseDiagnostic::error(
                line,
                format!("coreference bracket `({id}` is never closed within its sentence"),
            ));
        }
        self.open.clear();
        self.sentences.push(std::mem::take(&mut self.current));
        self.current_lines.clear();
        Ok(())
    }

    fn finish(
        mut self,
        diagnostics: &mut Vec<ParseDiagnostic>,
    ) -> std::result::Result<Document, ParseDiagnostic> {
        self.end_sentence()?;
        let mut clusters = Vec::with_capacity(self.mentions.len());
        let mut owners: HashMap<MentionSpan, ClusterId> = HashMap::new();
        for (id, mut spans) in self.mentions {
            spans.sort();
            if let Some(w) = spans.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(ParseDiagnostic::error(
                    w[1].1,
                    format!("cluster {id} contains span {} twice", w[1].0),
                ));
            }
            for (span, line) in &spans {
                if let Some(other) = owners.insert(*span, id) {
                    diagnostics.push(ParseDiagnostic::warning(
                        *line,
                        format!("span {span} appears in clusters {other} and {id}"),
                    ));
                }
            }
            clusters.push(Cluster {
                id,
                mentions: spans.into_iter().map(|(s, _)| s).collect(),
            });
        }
        let doc = Document {
            id: self.id,
            sentences: self.sentences,
            clusters,
        };
        doc.validate()
            .map_err(|e| ParseDiagnostic::error(self.begin_line, e.to_string()))?;
        Ok(doc)
    }
}

/// Parses a corpus, returning it together with all diagnostics.
///
/// Documents with errors are dropped. Fails with [`Error::EmptyCorpus`] when
/// no document survives, and with [`Error::Io`] when the reader fails.
pub fn parse_corpus<R: BufRead>(reader: R) -> Result<(Corpus, Vec<ParseDiagnostic>)> {
    let mut diagnostics = Vec::new();
    let mut documents: Vec<Document> = Vec::new();
    let mut seen_ids: HashSet<String> = HashSet::new();
    let mut split_label: Option<String> = None;
    let mut builder: Option<DocBuilder> = None;
    let mut line_number = 0;

    for line in reader.lines() {
        let line = line?;
        line_number += 1;
        let line = line.strip_suffix('\r').unwrap_or(&line);

        if let Some(rest) = line.strip_prefix(BEGIN) {
            if let Some(open) = builder.take() {
                diagnostics.push(ParseDiagnostic::error(
                    open.begin_line,
                    format!("document `{}` is not terminated by `{END}`", open.id),
                ));
            }
            let id = rest.trim();
            if id.is_empty() || !rest.starts_with(' ') {
                diagnostics.push(ParseDiagnostic::error(
                    line_number,
                    "document header without an id",
                ));
                let mut b = DocBuilder::new(String::new(), line_number);
                b.failed = true;
                builder = Some(b);
            } else {
                builder = Some(DocBuilder::new(id.to_owned(), line_number));
            }
            continue;
        }

        if line.trim_end() == END {
            match builder.take() {
                Some(b) if b.failed => {}
                Some(b) => {
                    let id = b.id.clone();
                    let begin = b.begin_line;
                    match b.finish(&mut diagnostics) {
                        Ok(_) if seen_ids.contains(&id) => diagnostics.push(
                            ParseDiagnostic::error(begin, format!("duplicate document id `{id}`")),
                        ),
                        Ok(doc) => {
                            seen_ids.insert(id);
                            documents.push(doc);
                        }
                        Err(d) => diagnostics.push(d),
                    }
                }
                None => diagnostics.push(ParseDiagnostic::error(
                    line_number,
                    format!("`{END}` without a matching `{BEGIN}`"),
                )),
            }
            continue;
        }

        match builder.as_mut() {
            None => {
                if let Some(rest) = line.strip_prefix(SPLIT) {
                    let label = rest.trim();
                    if rest.starts_with(' ') && !label.is_empty() {
                        if split_label.as_deref().is_some_and(|l| l != label) {
                            diagnostics.push(ParseDiagnostic::warning(
                                line_number,
                                format!("split label redefined as `{label}`"),
                            ));
                        }
                        split_label = Some(label.to_owned());
                        continue;
                    }
                }
                if !line.trim().is_empty() && !line.starts_with('#') {
                    diagnostics.push(ParseDiagnostic::error(
                        line_number,
                        "content outside of a document",
                    ));
                }
            }
            Some(b) if b.failed => {}
            Some(b) => {
                let outcome = if line.trim().is_empty() {
                    b.end_sentence()
                } else if line.starts_with('#') {
                    Ok(())
                } else {
                    b.token_line(line, line_number)
                };
                if let Err(d) = outcome {
                    diagnostics.push(d);
                    b.failed = true;
                }
            }
        }
    }

    if let Some(open) = builder {
        diagnostics.push(ParseDiagnostic::error(
            open.begin_line,
            format!("document `{}` is not terminated by `{END}`", open.id),
        ));
    }

    if documents.is_empty() {
        return Err(Error::EmptyCorpus { diagnostics });
    }
    Ok((
        Corpus {
            documents,
            split_label,
        },
        diagnostics,
    ))
}

pub fn parse_corpus_str(text: &str) -> Result<(Corpus, Vec<ParseDiagnostic>)> {
    parse_corpus(text.as_bytes())
}

fn check_column(doc: &Document, token: &Token, name: &str, value: &str) -> Result<()> {
    if value.is_empty() || value.contains(['\t', '\n', '\r']) {
        return Err(Error::InvalidDocument {
            document: doc.id.clone(),
            message: format!(
                "token ({}, {}) has a {name} that cannot be written: {value:?}",
                token.sentence_index, token.token_index
            ),
        });
    }
    Ok(())
}

/// Checks what the file format needs beyond [`Document::validate`].
fn check_serializable(doc: &Document) -> Result<()> {
    doc.validate()?;
    let invalid = |message: String| Error::InvalidDocument {
        document: doc.id.clone(),
        message,
    };
    if doc.id != doc.id.trim() || doc.id.contains(['\n', '\r']) {
        return Err(invalid(
            "document id has surrounding whitespace or line breaks".into(),
        ));
    }
    for token in doc.tokens() {
        check_column(doc, token, "form", &token.form)?;
        check_column(doc, token, "lemma", &token.lemma)?;
        check_column(doc, token, "POS tag", &token.pos)?;
        check_column(doc, token, "dependency relation", &token.dep_rel)?;
        check_column(doc, token, "NER label", &token.ner)?;
        if !token.feats.is_empty() {
            check_column(doc, token, "feature string", &token.feats)?;
            if token.feats == "_" {
                return Err(invalid(
                    "a literal `_` feature string is reserved for empty features".into(),
                ));
            }
        }
    }
    for cluster in &doc.clusters {
        for (i, a) in cluster.mentions.iter().enumerate() {
            for b in &cluster.mentions[i + 1..] {
                if a.sentence_index == b.sentence_index
                    && a.start < b.start
                    && b.start <= a.end
                    && a.end < b.end
                {
                    return Err(invalid(format!(
                        "cluster {} has crossing mentions {a} and {b}, which brackets cannot encode",
                        cluster.id
                    )));
                }
            }
        }
    }
    Ok(())
}

fn coref_column(opens: &[ClusterId], singles: &[ClusterId], closes: &[ClusterId]) -> String {
    if opens.is_empty() && singles.is_empty() && closes.is_empty() {
        return "-".to_owned();
    }
    let entries: Vec<String> = opens
        .iter()
        .map(|id| format!("({id}"))
        .chain(singles.iter().map(|id| format!("({id})")))
        .chain(closes.iter().map(|id| format!("{id})")))
        .collect();
    entries.join("|")
}

/// Appends one document in canonical form.
pub fn serialize_document(doc: &Document, out: &mut String) -> Result<()> {
    use std::fmt::Write as _;

    check_serializable(doc)?;
    let mut opens: HashMap<(usize, usize), Vec<ClusterId>> = HashMap::new();
    let mut singles: HashMap<(usize, usize), Vec<ClusterId>> = HashMap::new();
    let mut closes: HashMap<(usize, usize), Vec<ClusterId>> = HashMap::new();
    for cluster in &doc.clusters {
        for m in &cluster.mentions {
            if m.is_single_token() {
                singles
                    .entry((m.sentence_index, m.start))
                    .or_default()
                    .push(cluster.id);
            } else {
                opens
                    .entry((m.sentence_index, m.start))
                    .or_default()
                    .push(cluster.id);
                closes
                    .entry((m.sentence_index, m.end))
                    .or_default()
                    .push(cluster.id);
            }
        }
    }
    for ids in opens
        .values_mut()
        .chain(singles.values_mut())
        .chain(closes.values_mut())
    {
        ids.sort_unstable();
    }

    let empty = Vec::new();
    writeln!(out, "{BEGIN} {}", doc.id).unwrap();
    for (s, sentence) in doc.sentences.iter().enumerate() {
        for (t, token) in sentence.iter().enumerate() {
            let key = (s, t);
            let head = match token.dep_head {
                DepHead::Root => 0,
                DepHead::Token(h) => h + 1,
            };
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                t + 1,
                token.form,
                token.lemma,
                token.pos,
                if token.feats.is_empty() {
                    "_"
                } else {
                    &token.feats
                },
                head,
                token.dep_rel,
                token.ner,
                coref_column(
                    opens.get(&key).unwrap_or(&empty),
                    singles.get(&key).unwrap_or(&empty),
                    closes.get(&key).unwrap_or(&empty),
                )
            )
            .unwrap();
        }
        out.push('\n');
    }
    out.push_str(END);
    out.push('\n');
    Ok(())
}

/// Serialises a corpus in canonical form. Fails if any document violates the
/// model invariants or cannot be expressed in the format.
pub fn serialize_corpus(corpus: &Corpus) -> Result<String> {
    corpus.check_unique_ids()?;
    let mut out = String::new();
    if let Some(label) = &corpus.split_label {
        let label = label.trim();
        if label.is_empty() || label.contains(['\n', '\r']) {
            return Err(Error::InvalidCorpus(format!(
                "unwritable split label {label:?}"
            )));
        }
        out.push_str(SPLIT);
        out.push(' ');
        out.push_str(label);
        out.push('\n');
    }
    for doc in &corpus.documents {
        serialize_document(doc, &mut out)?;
    }
    Ok(out)
}

pub fn write_corpus<W: Write>(corpus: &Corpus, mut writer: W) -> Result<()> {
    writer.write_all(serialize_corpus(corpus)?.as_bytes())?;
    Ok(())
}

/// Drops every cluster with fewer than two mentions. Tokens are untouched.
pub fn strip_singletons(doc: &Document) -> Document {
    Document {
        id: doc.id.clone(),
        sentences: doc.sentences.clone(),
        clusters: doc
            .clusters
            .iter()
            .filter(|c| c.len() >= 2)
            .cloned()
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(idx: usize, form: &str, coref: &str) -> String {
        format!(
            "{idx}\t{form}\t{}\tX\t_\t0\troot\tO\t{coref}\n",
            form.to_lowercase()
        )
    }

    #[test]
    fn minimal_single_mention() {
        let text = format!(
            "{BEGIN} d1\n{}{}\n{END}\n",
            line(1, "Hij", "(0)"),
            line(2, "slaapt", "-")
        );
        let (corpus, diags) = parse_corpus_str(&text).unwrap();
        assert!(diags.is_empty());
        let doc = &corpus.documents[0];
        assert_eq!(doc.clusters.len(), 1);
        assert_eq!(doc.clusters[0].mentions, vec![MentionSpan::single(0, 0)]);
        assert_eq!(serialize_corpus(&corpus).unwrap(), text);
    }

    #[test]
    fn unclosed_bracket_names_its_line() {
        let text = format!(
            "{BEGIN} d1\n{}{}\n{END}\n{BEGIN} d2\n{}\n{END}\n",
            line(1, "a", "-"),
            line(2, "b", "(7"),
            line(1, "c", "-")
        );
        let (corpus, diags) = parse_corpus_str(&text).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(corpus.documents[0].id, "d2");
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, Severity::Error);
        assert_eq!(diags[0].line_number, 3);
        assert!(diags[0].message.contains("(7"));
    }

    #[test]
    fn unmatched_close_and_bad_columns_are_errors() {
        let bad_close = format!("{BEGIN} a\n{}\n{END}\n", line(1, "x", "3)"));
        assert!(matches!(
            parse_corpus_str(&bad_close),
            Err(Error::EmptyCorpus { .. })
        ));

        let short = format!("{BEGIN} a\n1\tx\tx\n\n{END}\n");
        match parse_corpus_str(&short) {
            Err(Error::EmptyCorpus { diagnostics }) => assert_eq!(diagnostics[0].line_number, 2),
            other => panic!("unexpected {other:?}"),
        }

        let bad_index = format!("{BEGIN} a\n{}\n{END}\n", line(2, "x", "-"));
        assert!(parse_corpus_str(&bad_index).is_err());
    }

    #[test]
    fn duplicate_ids_drop_the_later_document() {
        let doc = |form: &str| format!("{BEGIN} same\n{}\n{END}\n", line(1, form, "-"));
        let (corpus, diags) = parse_corpus_str(&(doc("a") + &doc("b"))).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(corpus.documents[0].sentences[0][0].form, "a");
        assert_eq!(diags[0].line_number, 5);
    }

    #[test]
    fn missing_end_and_empty_input() {
        let text = format!("{BEGIN} a\n{}\n", line(1, "x", "-"));
        match parse_corpus_str(&text) {
            Err(Error::EmptyCorpus { diagnostics }) => assert_eq!(diagnostics[0].line_number, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_corpus_str(""),
            Err(Error::EmptyCorpus { .. })
        ));
    }

    #[test]
    fn nested_and_multi_bracket_tokens() {
        // [their roommate] in cluster 1 with [their] in cluster 0.
        let text = format!(
            "{BEGIN} d\n{}{}{}\n{END}\n",
            line(1, "asked", "-"),
            line(2, "their", "(1|(0)"),
            line(3, "roommate", "1)")
        );
        let (corpus, _) = parse_corpus_str(&text).unwrap();
        let doc = &corpus.documents[0];
        assert_eq!(doc.clusters[0].mentions, vec![MentionSpan::single(0, 1)]);
        assert_eq!(doc.clusters[1].mentions, vec![MentionSpan::new(0, 1, 2)]);
        assert_eq!(serialize_corpus(&corpus).unwrap(), text);
    }

    #[test]
    fn canonicalises_bracket_order() {
        let text = format!(
            "{BEGIN} d\n{}{}\n{END}\n",
            line(1, "a", "(0)|(2|(1"),
            line(2, "b", "2)|1)")
        );
        let (corpus, _) = parse_corpus_str(&text).unwrap();
        let out = serialize_corpus(&corpus).unwrap();
        assert!(out.contains("\t(1|(2|(0)\n"));
        assert!(out.contains("\t1)|2)\n"));
        let (again, _) = parse_corpus_str(&out).unwrap();
        assert_eq!(again, corpus);
        assert_eq!(serialize_corpus(&again).unwrap(), out);
    }

    #[test]
    fn empty_clusters_write_dashes() {
        let doc = Document::new(
            "x",
            vec![vec![Token::new(0, 0, "a"), Token::new(0, 1, "b")]],
            vec![],
        )
        .unwrap();
        let out = serialize_corpus(&Corpus::new(vec![doc]).unwrap()).unwrap();
        assert!(out
            .lines()
            .filter(|l| l.starts_with(char::is_numeric))
            .all(|l| l.ends_with("\t-")));
    }

    #[test]
    fn crossing_same_cluster_spans_are_rejected() {
        let tokens = (0..4).map(|t| Token::new(0, t, "w")).collect();
        let cluster =
            Cluster::new(0, [MentionSpan::new(0, 0, 2), MentionSpan::new(0, 1, 3)]).unwrap();
        let doc = Document::new("x", vec![tokens], vec![cluster]).unwrap();
        assert!(serialize_corpus(&Corpus::new(vec![doc]).unwrap()).is_err());
    }

    #[test]
    fn split_label_round_trips() {
        let text = format!("{SPLIT} test\n{BEGIN} d\n{}\n{END}\n", line(1, "x", "-"));
        let (corpus, _) = parse_corpus_str(&text).unwrap();
        assert_eq!(corpus.split_label.as_deref(), Some("test"));
        assert_eq!(serialize_corpus(&corpus).unwrap(), text);
    }

    #[test]
    fn strip_singletons_fixed_point_and_all_singletons() {
        let tokens: Vec<Token> = (0..3).map(|t| Token::new(0, t, "w")).collect();
        let pair = Cluster::new(0, [MentionSpan::single(0, 0), MentionSpan::single(0, 2)]).unwrap();
        let single = Cluster::new(1, [MentionSpan::single(0, 1)]).unwrap();
        let doc = Document::new("x", vec![tokens.clone()], vec![pair.clone()]).unwrap();
        assert_eq!(strip_singletons(&doc), doc);

        let only = Document::new("x", vec![tokens], vec![single]).unwrap();
        assert!(strip_singletons(&only).clusters.is_empty());
    }
}
