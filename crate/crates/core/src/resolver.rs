//! A deterministic two-sieve coreference resolver.
//!
//! Candidate mentions are maximal runs of person-name tokens (PER-tagged or
//! `ANON_x`) and single third-person singular pronouns. Sieve 1 merges name
//! mentions with identical lowercased text. Sieve 2 attaches each pronoun to
//! the closest preceding name mention at most `pronoun_window_sentences`
//! sentences back. Clusters of one mention are dropped.

use std::collections::HashMap;

use crate::model::{Cluster, ClusterId, Document, MentionSpan};
use crate::transform::{classify_pronoun, is_anon_tag, is_person_label, ClassifierConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolverConfig {
    pub pronoun_window_sentences: usize,
    pub enable_string_match: bool,
}

impl Default for ResolverConfig {
    fn default() -> Self {
        ResolverConfig {
            pronoun_window_sentences: 2,
            enable_string_match: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MentionKind {
    Name,
    Pronoun,
}

/// Candidate mentions in document order.
pub fn candidate_mentions(
    doc: &Document,
    cfg: &ClassifierConfig,
) -> Vec<(MentionSpan, MentionKind)> {
    let mut out = Vec::new();
    for (s, sentence) in doc.sentences.iter().enumerate() {
        let mut run_start: Option<usize> = None;
        for (t, token) in sentence.iter().enumerate() {
            let pronoun = classify_pronoun(token, cfg).is_some();
            let name = !pronoun && (is_person_label(&token.ner) || is_anon_tag(&token.form));
            if !name {
                if let Some(a) = run_start.take() {
                    out.push((MentionSpan::new(s, a, t - 1), MentionKind::Name));
                }
            } else if run_start.is_none() {
                run_start = Some(t);
            }
            if pronoun {
                out.push((MentionSpan::single(s, t), MentionKind::Pronoun));
            }
        }
        if let Some(a) = run_start {
            out.push((
                MentionSpan::new(s, a, sentence.len() - 1),
                MentionKind::Name,
            ));
        }
    }
    out
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut cur = x;
        while self.0[cur] != root {
            let next = self.0[cur];
            self.0[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        // The smaller index stays root so results do not depend on call order.
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.0[hi] = lo;
    }
}

/// Returns `doc` with its clusters replaced by the resolver's prediction.
/// Cluster ids are assigned from 0 in order of each cluster's first mention.
pub fn resolve(doc: &Document, cfg: &ClassifierConfig, rcfg: &ResolverConfig) -> Document {
    let mentions = candidate_mentions(doc, cfg);
    let mut uf = UnionFind((0..mentions.len()).collect());

    if rcfg.enable_string_match {
        let mut first_by_text: HashMap<String, usize> = HashMap::new();
        for (i, (span, kind)) in mentions.iter().enumerate() {
            if *kind != MentionKind::Name {
                continue;
            }
            let text = doc.span_forms(span).join(" ").to_lowercase();
            match first_by_text.get(&text) {
                Some(&j) => uf.union(i, j),
                None => {
                    first_by_text.insert(text, i);
                }
            }
        }
    }

    for (i, (span, kind)) in mentions.iter().enumerate() {
        if *kind != MentionKind::Pronoun {
            continue;
        }
        // Mentions are in document order, so the first name found scanning
        // backwards is the closest one.
        let antecedent = mentions[..i].iter().rposition(|(m, k)| {
            *k == MentionKind::Name
                && m.sentence_index + rcfg.pronoun_window_sentences >= span.sentence_index
                && (m.sentence_index < span.sentence_index || m.end < span.start)
        });
        if let Some(j) = antecedent {
            uf.union(i, j);
        }
    }

    let mut groups: Vec<Vec<MentionSpan>> = Vec::new();
    let mut group_of_root: HashMap<usize, usize> = HashMap::new();
    for (i, (span, _)) in mentions.iter().enumerate() {
        let root = uf.find(i);
        let g = *group_of_root.entry(root).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(*span);
    }
    let clusters = groups
        .into_iter()
        .filter(|g| g.len() > 1)
        .enumerate()
        .map(|(id, spans)| {
            Cluster::new(id as ClusterId, spans).expect("candidate mentions are distinct")
        })
        .collect();
    Document {
        id: doc.id.clone(),
        sentences: doc.sentences.clone(),
        clusters,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Token;

    const HIJ: &str = "Case=Nom|Gender=Masc|Number=Sing|Person=3|PronType=Prs";

    fn doc(sentences: &[&[(&str, &str)]]) -> Document {
        let sentences = sentences
            .iter()
            .enumerate()
            .map(|(s, toks)| {
                toks.iter()
                    .enumerate()
                    .map(|(t, (form, kind))| {
                        let tok = Token::new(s, t, *form);
                        match *kind {
                            "per" => tok.with_pos("PROPN").with_ner("PER"),
                            "hij" => tok.with_pos("PRON").with_feats(HIJ),
                            _ => tok.with_pos("VERB"),
                        }
                    })
                    .collect()
            })
            .collect();
        Document::new("d", sentences, vec![]).unwrap()
    }

    #[test]
    fn pronoun_links_to_preceding_name() {
        let d = doc(&[
            &[("ANON_0", "x"), ("slaapt", "x"), (".", "x")],
            &[("Hij", "hij"), ("droomt", "x"), (".", "x")],
        ]);
        let out = resolve(&d, &ClassifierConfig::default(), &ResolverConfig::default());
        assert_eq!(out.clusters.len(), 1);
        assert_eq!(
            out.clusters[0].mentions,
            vec![MentionSpan::single(0, 0), MentionSpan::single(1, 0)]
        );
    }

    #[test]
    fn string_match_merges_names() {
        let d = doc(&[
            &[("ANON_0", "x"), ("komt", "x")],
            &[("later", "x")],
            &[("ANON_0", "x"), ("gaat", "x")],
        ]);
        let out = resolve(&d, &ClassifierConfig::default(), &ResolverConfig::default());
        assert_eq!(out.clusters.len(), 1);
        assert_eq!(out.clusters[0].len(), 2);

        let off = ResolverConfig {
            enable_string_match: false,
            ..ResolverConfig::default()
        };
        assert!(resolve(&d, &ClassifierConfig::default(), &off)
            .clusters
            .is_empty());
    }

    #[test]
    fn window_limits_pronoun_links() {
        let d = doc(&[
            &[("Jan", "per")],
            &[("a", "x")],
            &[("b", "x")],
            &[("hij", "hij")],
        ]);
        let narrow = ResolverConfig {
            pronoun_window_sentences: 2,
            ..ResolverConfig::default()
        };
        assert!(resolve(&d, &ClassifierConfig::default(), &narrow)
            .clusters
            .is_empty());
        let wide = ResolverConfig {
            pronoun_window_sentences: 3,
            ..ResolverConfig::default()
        };
        assert_eq!(
            resolve(&d, &ClassifierConfig::default(), &wide)
                .clusters
                .len(),
            1
        );
    }

    #[test]
    fn multi_token_names_and_closest_antecedent() {
        let d = doc(&[&[
            ("Jan", "per"),
            ("Smit", "per"),
            ("en", "x"),
            ("Piet", "per"),
            ("zegt", "x"),
            ("hij", "hij"),
        ]]);
        let out = resolve(&d, &ClassifierConfig::default(), &ResolverConfig::default());
        assert_eq!(out.clusters.len(), 1);
        assert_eq!(
            out.clusters[0].mentions,
            vec![MentionSpan::single(0, 3), MentionSpan::single(0, 5)]
        );
    }
}
