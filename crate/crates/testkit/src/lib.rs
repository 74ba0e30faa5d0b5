//! Test support: fixture paths, seeded random corpora and brute-force
//! reference implementations used to cross-check the library.
//!
//! The reference implementations are deliberately naive. They enumerate
//! pairs and scan lists where the library uses maps and binary search, so a
//! shared bug is unlikely.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use corefkit::lexicon::builtin_noun_lexicon;
use corefkit::model::{Cluster, ClusterId, Corpus, DepHead, Document, MentionSpan, Token};
use corefkit::transform::{is_anon_tag, is_person_label, ClassifierConfig, PronounFunction};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(name: &str) -> PathBuf {
    fixtures_dir().join(name)
}

pub fn read_fixture(name: &str) -> String {
    let path = fixture(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()))
}

pub fn load_fixture(name: &str) -> Corpus {
    corefkit::parse_corpus_str(&read_fixture(name))
        .unwrap_or_else(|e| panic!("fixture {name} does not parse: {e}"))
        .0
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const HIJ: &str = "Case=Nom|Gender=Masc|Number=Sing|Person=3|PronType=Prs";
pub const HEM: &str = "Case=Acc|Gender=Masc|Number=Sing|Person=3|PronType=Prs";
pub const ZIJN: &str = "Gender=Masc|Number=Sing|Person=3|Poss=Yes|PronType=Prs";
pub const ZIJ: &str = "Case=Nom|Gender=Fem|Number=Sing|Person=3|PronType=Prs";
pub const HAAR_OBJ: &str = "Case=Acc|Gender=Fem|Number=Sing|Person=3|PronType=Prs";
pub const HAAR_POSS: &str = "Gender=Fem|Number=Sing|Person=3|Poss=Yes|PronType=Prs";
pub const PLURAL_OBJ: &str = "Case=Acc|Number=Plur|Person=3|PronType=Prs";
pub const FIRST_PERSON: &str = "Case=Nom|Number=Sing|Person=1|PronType=Prs";

/// `(form, pos, feats)` for every pronoun the generator emits.
const PRONOUNS: &[(&str, &str, &str)] = &[
    ("hij", "PRON", HIJ),
    ("hem", "PRON", HEM),
    ("zijn", "DET", ZIJN),
    ("zij", "PRON", ZIJ),
    ("haar", "PRON", HAAR_OBJ),
    ("haar", "DET", HAAR_POSS),
    ("hen", "PRON", PLURAL_OBJ),
    ("ik", "PRON", FIRST_PERSON),
    ("die", "PRON", "PronType=Rel"),
    ("dat", "PRON", "PronType=Dem"),
];
const NAMES: &[&str] = &[
    "Jan", "Piet", "Marie", "Anna", "Smit", "Fatima", "ANON_0", "ANON_3",
];
const OTHER_NOUNS: &[&str] = &["huis", "tafel", "stad", "boek"];
const FILLER: &[(&str, &str)] = &[
    ("loopt", "VERB"),
    ("ziet", "VERB"),
    ("naar", "ADP"),
    ("en", "CCONJ"),
    ("de", "DET"),
    (".", "PUNCT"),
    (",", "PUNCT"),
];

/// Size limits for generated documents.
#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    pub max_sentences: usize,
    pub max_tokens: usize,
    pub max_mentions: usize,
    pub max_span_len: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_sentences: 5,
            max_tokens: 12,
            max_mentions: 12,
            max_span_len: 4,
        }
    }
}

fn random_token<R: Rng>(rng: &mut R, s: usize, t: usize, len: usize, nouns: &[String]) -> Token {
    let (form, pos, feats, ner) = match rng.random_range(0..10) {
        0..=2 => {
            let (f, p, x) = *PRONOUNS.choose(rng).unwrap();
            (f.to_owned(), p, x, "O")
        }
        3 | 4 => ((*NAMES.choose(rng).unwrap()).to_owned(), "PROPN", "", "PER"),
        5 | 6 => {
            let noun = if rng.random_bool(0.7) {
                nouns.choose(rng).unwrap().clone()
            } else {
                (*OTHER_NOUNS.choose(rng).unwrap()).to_owned()
            };
            (noun, "NOUN", "Number=Sing", "O")
        }
        _ => {
            let (f, p) = *FILLER.choose(rng).unwrap();
            (f.to_owned(), p, "", "O")
        }
    };
    let form = match rng.random_range(0..8) {
        0 => capitalise(&form),
        1 => form.to_uppercase(),
        _ => form,
    };
    let head = if rng.random_bool(0.2) {
        DepHead::Root
    } else {
        DepHead::Token(rng.random_range(0..len))
    };
    Token::new(s, t, form)
        .with_pos(pos)
        .with_feats(feats)
        .with_head(head, if head == DepHead::Root { "root" } else { "dep" })
        .with_ner(ner)
}

fn capitalise(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn crosses(a: &MentionSpan, b: &MentionSpan) -> bool {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    a.sentence_index == b.sentence_index && a.start < b.start && b.start <= a.end && a.end < b.end
}

/// Groups spans into clusters, starting a fresh cluster whenever the chosen
/// one already holds a crossing span. Ids are drawn sparsely from 0..100.
fn cluster_spans<R: Rng>(rng: &mut R, spans: Vec<(MentionSpan, usize)>) -> Vec<Cluster> {
    let mut groups: Vec<Vec<MentionSpan>> = Vec::new();
    let mut slot_of_label: Vec<(usize, usize)> = Vec::new();
    for (span, label) in spans {
        let existing = slot_of_label
            .iter()
            .filter(|(l, _)| *l == label)
            .map(|(_, g)| *g)
            .find(|&g| !groups[g].iter().any(|m| crosses(m, &span)));
        match existing {
            Some(g) => groups[g].push(span),
            None => {
                groups.push(vec![span]);
                slot_of_label.push((label, groups.len() - 1));
            }
        }
    }
    let mut ids: Vec<ClusterId> =
        rand::seq::index::sample(rng, 100.max(groups.len()), groups.len())
            .into_iter()
            .map(|i| i as ClusterId)
            .collect();
    ids.sort_unstable();
    groups
        .into_iter()
        .zip(ids)
        .map(|(spans, id)| Cluster::new(id, spans).unwrap())
        .collect()
}

fn random_span<R: Rng>(rng: &mut R, sentences: &[Vec<Token>], max_len: usize) -> MentionSpan {
    let s = rng.random_range(0..sentences.len());
    let len = sentences[s].len();
    let start = rng.random_range(0..len);
    let end = (start + rng.random_range(0..max_len)).min(len - 1);
    MentionSpan::new(s, start, end)
}

/// Random clusters over the token grid of `sentences`, with distinct spans.
pub fn random_clusters<R: Rng>(
    rng: &mut R,
    sentences: &[Vec<Token>],
    cfg: &GenConfig,
) -> Vec<Cluster> {
    let n = rng.random_range(0..=cfg.max_mentions);
    let labels = rng.random_range(1..=4usize.max(n / 2));
    let mut seen = BTreeSet::new();
    let mut spans = Vec::new();
    for _ in 0..n {
        // Single tokens are favoured so pronoun mentions are common.
        let span = if rng.random_bool(0.6) {
            let s = random_span(rng, sentences, 1);
            MentionSpan::single(s.sentence_index, s.start)
        } else {
            random_span(rng, sentences, cfg.max_span_len)
        };
        if seen.insert(span) {
            spans.push((span, rng.random_range(0..labels)));
        }
    }
    cluster_spans(rng, spans)
}

pub fn random_sentences<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Vec<Vec<Token>> {
    let nouns: Vec<String> = builtin_noun_lexicon()
        .iter()
        .map(|(k, _)| k.to_owned())
        .collect();
    let n_sentences = rng.random_range(1..=cfg.max_sentences);
    (0..n_sentences)
        .map(|s| {
            let len = rng.random_range(1..=cfg.max_tokens);
            (0..len)
                .map(|t| random_token(rng, s, t, len, &nouns))
                .collect()
        })
        .collect()
}

pub fn random_document<R: Rng>(rng: &mut R, id: &str, cfg: &GenConfig) -> Document {
    let sentences = random_sentences(rng, cfg);
    let clusters = random_clusters(rng, &sentences, cfg);
    Document::new(id, sentences, clusters).unwrap()
}

pub fn random_corpus<R: Rng>(rng: &mut R, n_documents: usize, cfg: &GenConfig) -> Corpus {
    let docs = (0..n_documents)
        .map(|i| random_document(rng, &format!("doc{i:04}"), cfg))
        .collect();
    Corpus::new(docs).unwrap()
}

/// A deterministic corpus of `n_documents` small documents.
pub fn synthetic_corpus(n_documents: usize, seed: u64) -> Corpus {
    let cfg = GenConfig {
        max_sentences: 3,
        max_tokens: 8,
        max_mentions: 6,
        max_span_len: 3,
    };
    random_corpus(&mut rng(seed), n_documents, &cfg)
}

/// A noisy copy of the clusters of `gold` on the same token grid: most gold
/// mentions stay with their cluster, some move or vanish, and a few spurious
/// mentions appear.
pub fn perturbed_prediction<R: Rng>(rng: &mut R, gold: &Document) -> Document {
    let mut seen = BTreeSet::new();
    let mut spans = Vec::new();
    for cluster in &gold.clusters {
        for m in &cluster.mentions {
            let roll = rng.random_range(0..20);
            if roll < 3 || !seen.insert(*m) {
                continue;
            }
            let label = if roll < 6 {
                rng.random_range(0..1000)
            } else {
                cluster.id as usize
            };
            spans.push((*m, label));
        }
    }
    for _ in 0..rng.random_range(0..3) {
        let span = random_span(rng, &gold.sentences, 3);
        if seen.insert(span) {
            spans.push((span, rng.random_range(0..1000)));
        }
    }
    spans.sort();
    let clusters = cluster_spans(rng, spans);
    Document::new(gold.id.clone(), gold.sentences.clone(), clusters).unwrap()
}

fn mention_lists(clusters: &[Cluster]) -> Vec<Vec<MentionSpan>> {
    clusters.iter().map(|c| c.mentions.clone()).collect()
}

/// Resolved and total coreference links of `keys` against `responses`,
/// weighted by entity size, by explicit enumeration of mention pairs.
fn oracle_lea_side(keys: &[Vec<MentionSpan>], responses: &[Vec<MentionSpan>]) -> (f64, f64) {
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for key in keys {
        let size = key.len() as f64;
        denominator += size;
        let (mut links, mut resolved) = (0usize, 0usize);
        if key.len() == 1 {
            links = 1;
            if responses.iter().any(|r| r.contains(&key[0])) {
                resolved = 1;
            }
        } else {
            for i in 0..key.len() {
                for j in i + 1..key.len() {
                    links += 1;
                    resolved += responses
                        .iter()
                        .filter(|r| r.contains(&key[i]) && r.contains(&key[j]))
                        .count();
                }
            }
        }
        numerator += size * resolved as f64 / links as f64;
    }
    (numerator, denominator)
}

/// `(precision, recall, f1)` of LEA.
pub fn oracle_lea(gold: &[Cluster], pred: &[Cluster], ignore_singletons: bool) -> (f64, f64, f64) {
    let keep = |c: &Vec<MentionSpan>| !ignore_singletons || c.len() > 1;
    let gold: Vec<_> = mention_lists(gold).into_iter().filter(keep).collect();
    let pred: Vec<_> = mention_lists(pred).into_iter().filter(keep).collect();
    if gold.is_empty() && pred.is_empty() {
        return (1.0, 1.0, 1.0);
    }
    let (rn, rd) = oracle_lea_side(&gold, &pred);
    let (pn, pd) = oracle_lea_side(&pred, &gold);
    let recall = if rd == 0.0 { 0.0 } else { rn / rd };
    let precision = if pd == 0.0 { 0.0 } else { pn / pd };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    (precision, recall, f1)
}

fn before(a: &MentionSpan, b: &MentionSpan) -> bool {
    (a.sentence_index, a.start, a.end) < (b.sentence_index, b.start, b.end)
}

/// Mentions preceding `span` in the lowest-id cluster that holds `span`.
fn oracle_antecedents(clusters: &[Cluster], span: &MentionSpan) -> Option<Vec<MentionSpan>> {
    let cluster = clusters
        .iter()
        .filter(|c| c.mentions.contains(span))
        .min_by_key(|c| c.id)?;
    Some(
        cluster
            .mentions
            .iter()
            .filter(|m| before(m, span))
            .copied()
            .collect(),
    )
}

/// `(resolved, total)` of the pronoun score.
pub fn oracle_pronoun_score(
    gold: &Document,
    pred: &Document,
    is_counted: impl Fn(&Token) -> bool,
) -> (usize, usize) {
    let (mut resolved, mut total) = (0, 0);
    for sentence in &gold.sentences {
        for token in sentence {
            if !is_counted(token) {
                continue;
            }
            let span = MentionSpan::single(token.sentence_index, token.token_index);
            let Some(gold_ants) = oracle_antecedents(&gold.clusters, &span) else {
                continue;
            };
            if gold_ants.is_empty() {
                continue;
            }
            total += 1;
            let pred_ants = oracle_antecedents(&pred.clusters, &span).unwrap_or_default();
            if pred_ants.iter().any(|m| gold_ants.contains(m)) {
                resolved += 1;
            }
        }
    }
    (resolved, total)
}

/// Every `(cluster, span)` covering the token, innermost first.
pub fn oracle_mention_containing(
    doc: &Document,
    s: usize,
    t: usize,
) -> Vec<(ClusterId, MentionSpan)> {
    let mut out = Vec::new();
    for c in &doc.clusters {
        for m in &c.mentions {
            if m.sentence_index == s && m.start <= t && t <= m.end {
                out.push((c.id, *m));
            }
        }
    }
    out.sort_by_key(|(id, m)| (m.end - m.start, m.start, *id));
    out
}

/// Independent implementation of the two resolver sieves. Returns the
/// predicted clusters in order of first mention.
pub fn oracle_resolve(
    doc: &Document,
    cfg: &ClassifierConfig,
    window: usize,
    string_match: bool,
) -> Vec<Vec<MentionSpan>> {
    let is_pronoun = |t: &Token| corefkit::classify_pronoun(t, cfg).is_some();
    let is_name = |t: &Token| !is_pronoun(t) && (is_person_label(&t.ner) || is_anon_tag(&t.form));

    // (span, is_pronoun, lowercase text)
    let mut mentions: Vec<(MentionSpan, bool, String)> = Vec::new();
    for (s, sentence) in doc.sentences.iter().enumerate() {
        let mut t = 0;
        while t < sentence.len() {
            if is_pronoun(&sentence[t]) {
                mentions.push((MentionSpan::single(s, t), true, String::new()));
                t += 1;
            } else if is_name(&sentence[t]) {
                let start = t;
                while t + 1 < sentence.len() && is_name(&sentence[t + 1]) {
                    t += 1;
                }
                let text: Vec<String> = sentence[start..=t]
                    .iter()
                    .map(|x| x.form.to_lowercase())
                    .collect();
                mentions.push((MentionSpan::new(s, start, t), false, text.join(" ")));
                t += 1;
            } else {
                t += 1;
            }
        }
    }

    let mut edges = Vec::new();
    for i in 0..mentions.len() {
        for j in 0..i {
            if string_match && !mentions[i].1 && !mentions[j].1 && mentions[i].2 == mentions[j].2 {
                edges.push((i, j));
            }
        }
        if mentions[i].1 {
            let p = mentions[i].0;
            let best = (0..mentions.len())
                .filter(|&j| !mentions[j].1)
                .filter(|&j| {
                    let m = mentions[j].0;
                    m.sentence_index + window >= p.sentence_index
                        && (m.sentence_index < p.sentence_index
                            || (m.sentence_index == p.sentence_index && m.end < p.start))
                })
                .max_by_key(|&j| (mentions[j].0.sentence_index, mentions[j].0.end));
            if let Some(j) = best {
                edges.push((i, j));
            }
        }
    }

    let mut label: Vec<usize> = (0..mentions.len()).collect();
    loop {
        let mut changed = false;
        for &(a, b) in &edges {
            let low = label[a].min(label[b]);
            for x in [a, b] {
                if label[x] != low {
                    label[x] = low;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut clusters: Vec<Vec<MentionSpan>> = Vec::new();
    let mut seen_labels: Vec<usize> = Vec::new();
    for (i, (span, _, _)) in mentions.iter().enumerate() {
        match seen_labels.iter().position(|&l| l == label[i]) {
            Some(k) => clusters[k].push(*span),
            None => {
                seen_labels.push(label[i]);
                clusters.push(vec![*span]);
            }
        }
    }
    clusters.retain(|c| c.len() > 1);
    clusters
}

/// `(per-function counts in declaration order, third-person singular count)`
/// for a lowercased form.
pub fn oracle_form_counts(
    corpus: &Corpus,
    form: &str,
    cfg: &ClassifierConfig,
) -> ([usize; 6], usize) {
    let order = [
        PronounFunction::PersonalSubject,
        PronounFunction::PersonalObject,
        PronounFunction::Possessive,
        PronounFunction::Relative,
        PronounFunction::Demonstrative,
        PronounFunction::Other,
    ];
    let mut counts = [0; 6];
    let mut third = 0;
    for doc in &corpus.documents {
        for sentence in &doc.sentences {
            for token in sentence {
                if token.form.to_lowercase() != form.to_lowercase() {
                    continue;
                }
                let f = cfg.function(token);
                counts[order.iter().position(|o| *o == f).unwrap()] += 1;
                if f <= PronounFunction::Possessive && cfg.is_third_singular(token) {
                    third += 1;
                }
            }
        }
    }
    (counts, third)
}
