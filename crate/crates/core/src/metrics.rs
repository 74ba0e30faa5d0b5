//! Coreference evaluation: the LEA metric and the pronoun score.
//!
//! LEA weights each entity by its size and scores the fraction of its
//! coreference links recovered by the other side:
//!
//! ```text
//! recall    = Σ_k |k| · Σ_r link(k ∩ r) / link(k)  /  Σ_k |k|
//! precision = the same with key and response swapped
//! link(E)   = |E|(|E|-1)/2
//! ```
//!
//! A singleton entity has a single self-link, resolved when any cluster on
//! the other side contains its mention.
//!
//! The pronoun score counts third-person singular pronouns whose predicted
//! antecedents share at least one mention with their gold antecedents.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::hash::Hash;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Cluster, Corpus, Document, MentionSpan, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LeaOptions {
    /// Drop singleton entities on both sides before scoring.
    pub ignore_singletons: bool,
}

/// Unnormalised LEA sums; adding counts of disjoint documents gives the
/// score of their union.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LeaCounts {
    pub recall_numerator: f64,
    pub recall_denominator: usize,
    pub precision_numerator: f64,
    pub precision_denominator: usize,
}

impl LeaCounts {
    pub fn merge(self, other: LeaCounts) -> LeaCounts {
        LeaCounts {
            recall_numerator: self.recall_numerator + other.recall_numerator,
            recall_denominator: self.recall_denominator + other.recall_denominator,
            precision_numerator: self.precision_numerator + other.precision_numerator,
            precision_denominator: self.precision_denominator + other.precision_denominator,
        }
    }

    pub fn score(&self) -> LeaScore {
        if self.recall_denominator == 0 && self.precision_denominator == 0 {
            return LeaScore::new(1.0, 1.0);
        }
        let ratio = |num: f64, den: usize| if den == 0 { 0.0 } else { num / den as f64 };
        LeaScore::new(
            ratio(self.precision_numerator, self.precision_denominator),
            ratio(self.recall_numerator, self.recall_denominator),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeaScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl LeaScore {
    pub fn new(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        LeaScore {
            precision,
            recall,
            f1,
        }
    }
}

fn link(size: usize) -> f64 {
    (size * size.saturating_sub(1) / 2) as f64
}

/// `(Σ |k| · resolution(k), Σ |k|)` for `keys` against `responses`.
fn lea_side<M: Eq + Hash + Copy>(keys: &[Vec<M>], responses: &[Vec<M>]) -> (f64, usize) {
    let mut owners: HashMap<M, Vec<usize>> = HashMap::new();
    for (r, entity) in responses.iter().enumerate() {
        for m in entity {
            owners.entry(*m).or_default().push(r);
        }
    }
    let mut numerator = 0.0;
    let mut denominator = 0;
    for key in keys {
        let size = key.len();
        if size == 0 {
            continue;
        }
        denominator += size;
        if size == 1 {
            if owners.contains_key(&key[0]) {
                numerator += 1.0;
            }
            continue;
        }
        let mut overlap: HashMap<usize, usize> = HashMap::new();
        for m in key {
            for &r in owners.get(m).into_iter().flatten() {
                *overlap.entry(r).or_default() += 1;
            }
        }
        let resolved: f64 = overlap.values().map(|&n| link(n)).sum();
        numerator += size as f64 * resolved / link(size);
    }
    (numerator, denominator)
}

fn dedup_entities<M: Ord + Copy>(
    entities: impl IntoIterator<Item = Vec<M>>,
    options: LeaOptions,
) -> Vec<Vec<M>> {
    entities
        .into_iter()
        .map(|mut e| {
            e.sort_unstable();
            e.dedup();
            e
        })
        .filter(|e| !e.is_empty() && !(options.ignore_singletons && e.len() < 2))
        .collect()
}

/// LEA sums for arbitrary entity sets. Mentions compare by equality only.
pub fn lea_counts_for<M: Eq + Hash + Ord + Copy>(
    gold: Vec<Vec<M>>,
    pred: Vec<Vec<M>>,
    options: LeaOptions,
) -> LeaCounts {
    let gold = dedup_entities(gold, options);
    let pred = dedup_entities(pred, options);
    let (recall_numerator, recall_denominator) = lea_side(&gold, &pred);
    let (precision_numerator, precision_denominator) = lea_side(&pred, &gold);
    LeaCounts {
        recall_numerator,
        recall_denominator,
        precision_numerator,
        precision_denominator,
    }
}

fn entities(clusters: &[Cluster]) -> Vec<Vec<MentionSpan>> {
    clusters.iter().map(|c| c.mentions.clone()).collect()
}

pub fn lea_counts(gold: &[Cluster], pred: &[Cluster], options: LeaOptions) -> LeaCounts {
    lea_counts_for(entities(gold), entities(pred), options)
}

/// LEA between two cluster sets over the same token grid, counting
/// singletons with a self-link.
pub fn lea(gold: &[Cluster], pred: &[Cluster]) -> LeaScore {
    lea_with(gold, pred, LeaOptions::default())
}

pub fn lea_with(gold: &[Cluster], pred: &[Cluster], options: LeaOptions) -> LeaScore {
    lea_counts(gold, pred, options).score()
}

/// Per-document pronoun tallies; they add up across documents.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PronounCounts {
    pub resolved: usize,
    pub total: usize,
    /// Lowercased form → `(resolved, total)`.
    pub per_form: BTreeMap<String, (usize, usize)>,
    /// Counted pronouns that are not a single-token gold mention.
    pub excluded_not_gold_mention: usize,
    /// Counted pronouns that open their gold cluster.
    pub excluded_first_mention: usize,
}

impl PronounCounts {
    pub fn merge(mut self, other: &PronounCounts) -> PronounCounts {
        self.resolved += other.resolved;
        self.total += other.total;
        self.excluded_not_gold_mention += other.excluded_not_gold_mention;
        self.excluded_first_mention += other.excluded_first_mention;
        for (form, (r, t)) in &other.per_form {
            let e = self.per_form.entry(form.clone()).or_default();
            e.0 += r;
            e.1 += t;
        }
        self
    }

    /// Percentage resolved, `None` when no pronoun was counted.
    pub fn score(&self) -> Option<f64> {
        (self.total > 0).then(|| 100.0 * self.resolved as f64 / self.total as f64)
    }
}

pub type PronounScoreResult = PronounCounts;

fn check_grid(gold: &Document, pred: &Document) -> Result<()> {
    let same = gold.sentences.len() == pred.sentences.len()
        && gold
            .sentences
            .iter()
            .zip(&pred.sentences)
            .all(|(g, p)| g.len() == p.len());
    if same {
        Ok(())
    } else {
        Err(Error::GridMismatch(gold.id.clone()))
    }
}

/// Scores every token selected by `is_counted` that is a single-token gold
/// mention with at least one gold antecedent. The pronoun is resolved when
/// its antecedents in the predicted cluster holding the same span intersect
/// its gold antecedents; a pronoun missing from every predicted cluster is
/// unresolved. Enclosing mentions (e.g. *their roommate*) play no role.
pub fn pronoun_score<F>(
    gold: &Document,
    pred: &Document,
    is_counted: F,
) -> Result<PronounScoreResult>
where
    F: Fn(&Token) -> bool,
{
    check_grid(gold, pred)?;
    let mut counts = PronounCounts::default();
    for token in gold.tokens().filter(|t| is_counted(t)) {
        let span = MentionSpan::single(token.sentence_index, token.token_index);
        let Some(gold_cluster) = gold.cluster_of(&span) else {
            counts.excluded_not_gold_mention += 1;
            continue;
        };
        let gold_ants = gold_cluster.antecedents(&span)?;
        if gold_ants.is_empty() {
            counts.excluded_first_mention += 1;
            continue;
        }
        let resolved = match pred.cluster_of(&span) {
            Some(c) => c
                .antecedents(&span)?
                .iter()
                .any(|a| gold_ants.binary_search(a).is_ok()),
            None => false,
        };
        counts.total += 1;
        counts.resolved += usize::from(resolved);
        let entry = counts
            .per_form
            .entry(token.form.to_lowercase())
            .or_default();
        entry.0 += usize::from(resolved);
        entry.1 += 1;
    }
    Ok(counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Averaging {
    /// Pronoun counts summed over documents.
    #[default]
    Micro,
    /// Mean of per-document scores, over documents with a defined score.
    Macro,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalOptions {
    pub lea: LeaOptions,
    pub averaging: Averaging,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub lea: LeaScore,
    pub lea_counts: LeaCounts,
    pub pronoun: PronounScoreResult,
    /// Headline pronoun score under `averaging`.
    pub pronoun_score: Option<f64>,
    pub averaging: Averaging,
    pub documents: usize,
}

/// Scores a predicted corpus against gold, pairing documents by id.
///
/// LEA is computed over the union of all documents' entities. Per-document
/// work runs in parallel; sums are folded in gold document order so the
/// result does not depend on the thread count.
pub fn evaluate<F>(
    gold: &Corpus,
    pred: &Corpus,
    is_counted: F,
    options: EvalOptions,
) -> Result<EvalReport>
where
    F: Fn(&Token) -> bool + Sync,
{
    let pred_by_id: HashMap<&str, &Document> =
        pred.documents.iter().map(|d| (d.id.as_str(), d)).collect();
    let gold_ids: std::collections::HashSet<&str> =
        gold.documents.iter().map(|d| d.id.as_str()).collect();
    let missing_in_pred: Vec<String> = gold
        .documents
        .iter()
        .filter(|d| !pred_by_id.contains_key(d.id.as_str()))
        .map(|d| d.id.clone())
        .collect();
    let missing_in_gold: Vec<String> = pred
        .documents
        .iter()
        .filter(|d| !gold_ids.contains(d.id.as_str()))
        .map(|d| d.id.clone())
        .collect();
    if !missing_in_pred.is_empty() || !missing_in_gold.is_empty() {
        return Err(Error::Alignment {
            missing_in_pred,
            missing_in_gold,
        });
    }

    let per_doc: Vec<(LeaCounts, PronounCounts)> = gold
        .documents
        .par_iter()
        .map(|g| {
            let p = pred_by_id[g.id.as_str()];
            let pronouns = pronoun_score(g, p, &is_counted)?;
            Ok((lea_counts(&g.clusters, &p.clusters, options.lea), pronouns))
        })
        .collect::<Result<_>>()?;

    let lea_counts = per_doc
        .iter()
        .fold(LeaCounts::default(), |acc, (l, _)| acc.merge(*l));
    let pronoun = per_doc
        .iter()
        .fold(PronounCounts::default(), |acc, (_, p)| acc.merge(p));
    let pronoun_score = match options.averaging {
        Averaging::Micro => pronoun.score(),
        Averaging::Macro => {
            let scores: Vec<f64> = per_doc.iter().filter_map(|(_, p)| p.score()).collect();
            (!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64)
        }
    };
    Ok(EvalReport {
        lea: lea_counts.score(),
        lea_counts,
        pronoun,
        pronoun_score,
        averaging: options.averaging,
        documents: gold.len(),
    })
}

fn fmt_score(score: Option<f64>) -> String {
    score.map_or_else(|| "undefined".to_owned(), |s| format!("{s:.2}"))
}

impl EvalReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let avg = match self.averaging {
            Averaging::Micro => "micro",
            Averaging::Macro => "macro",
        };
        let rows = [
            ("LEA precision", format!("{:.6}", self.lea.precision)),
            ("LEA recall", format!("{:.6}", self.lea.recall)),
            ("LEA F1", format!("{:.6}", self.lea.f1)),
            ("Pronoun score (%)", fmt_score(self.pronoun_score)),
            (
                "Pronouns resolved",
                format!("{}/{}", self.pronoun.resolved, self.pronoun.total),
            ),
            ("Averaging", avg.to_owned()),
            ("Documents", self.documents.to_string()),
        ];
        for (name, value) in rows {
            writeln!(out, "{name:<20}{value:>12}").unwrap();
        }
        if !self.pronoun.per_form.is_empty() {
            writeln!(out).unwrap();
            writeln!(
                out,
                "{:<20}{:>12}{:>12}",
                "Pronoun form", "resolved", "total"
            )
            .unwrap();
            for (form, (r, t)) in &self.pronoun.per_form {
                writeln!(out, "{form:<20}{r:>12}{t:>12}").unwrap();
            }
        }
        out
    }

    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        writeln!(out, "lea_precision={:.6}", self.lea.precision).unwrap();
        writeln!(out, "lea_recall={:.6}", self.lea.recall).unwrap();
        writeln!(out, "lea_f1={:.6}", self.lea.f1).unwrap();
        writeln!(
            out,
            "pronoun_score={}",
            self.pronoun_score
                .map_or_else(|| "NA".to_owned(), |s| format!("{s:.2}"))
        )
        .unwrap();
        writeln!(out, "pronoun_resolved={}", self.pronoun.resolved).unwrap();
        writeln!(out, "pronoun_total={}", self.pronoun.total).unwrap();
        writeln!(
            out,
            "pronoun_excluded_not_gold_mention={}",
            self.pronoun.excluded_not_gold_mention
        )
        .unwrap();
        writeln!(
            out,
            "pronoun_excluded_first_mention={}",
            self.pronoun.excluded_first_mention
        )
        .unwrap();
        writeln!(
            out,
            "averaging={}",
            match self.averaging {
                Averaging::Micro => "micro",
                Averaging::Macro => "macro",
            }
        )
        .unwrap();
        writeln!(out, "documents={}", self.documents).unwrap();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Option<MeanStd> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(MeanStd {
            mean,
            std: var.sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateReport {
    pub runs: usize,
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub f1: MeanStd,
    /// Over the runs whose pronoun score is defined.
    pub pronoun_score: Option<MeanStd>,
}

/// Mean and population σ of each metric across runs.
pub fn aggregate(reports: &[EvalReport]) -> Result<AggregateReport> {
    if reports.is_empty() {
        return Err(Error::EmptyInput);
    }
    let collect = |f: fn(&EvalReport) -> f64| {
        MeanStd::of(&reports.iter().map(f).collect::<Vec<_>>()).unwrap()
    };
    let pronoun: Vec<f64> = reports.iter().filter_map(|r| r.pronoun_score).collect();
    Ok(AggregateReport {
        runs: reports.len(),
        precision: collect(|r| r.lea.precision),
        recall: collect(|r| r.lea.recall),
        f1: collect(|r| r.lea.f1),
        pronoun_score: MeanStd::of(&pronoun),
    })
}

impl AggregateReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{:<20}{:>12}{:>12}", "Metric", "mean", "sigma").unwrap();
        for (name, m) in [
            ("LEA precision", self.precision),
            ("LEA recall", self.recall),
            ("LEA F1", self.f1),
        ] {
            writeln!(out, "{name:<20}{:>12.6}{:>12.6}", m.mean, m.std).unwrap();
        }
        match self.pronoun_score {
            Some(m) => writeln!(
                out,
                "{:<20}{:>12.2}{:>12.2}",
                "Pronoun score (%)", m.mean, m.std
            )
            .unwrap(),
            None => writeln!(
                out,
                "{:<20}{:>12}{:>12}",
                "Pronoun score (%)", "undefined", "-"
            )
            .unwrap(),
        }
        writeln!(out, "{:<20}{:>12}", "Runs", self.runs).unwrap();
        out
    }

    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        for (name, m) in [
            ("lea_precision", self.precision),
            ("lea_recall", self.recall),
            ("lea_f1", self.f1),
        ] {
            writeln!(out, "{name}_mean={:.6}", m.mean).unwrap();
            writeln!(out, "{name}_std={:.6}", m.std).unwrap();
        }
        match self.pronoun_score {
            Some(m) => {
                writeln!(out, "pronoun_score_mean={:.2}", m.mean).unwrap();
                writeln!(out, "pronoun_score_std={:.2}", m.std).unwrap();
            }
            None => {
                writeln!(out, "pronoun_score_mean=NA").unwrap();
                writeln!(out, "pronoun_score_std=NA").unwrap();
            }
        }
        writeln!(out, "runs={}", self.runs).unwrap();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span(s: usize, a: usize, b: usize) -> MentionSpan {
        MentionSpan::new(s, a, b)
    }

    fn cluster(id: u32, spans: &[MentionSpan]) -> Cluster {
        Cluster::new(id, spans.iter().copied()).unwrap()
    }

    // Raven entered the kitchen. / "Did you sleep well?", they asked their
    // roommate. / "No Raven", said Thorn annoyed, "Tobi called me ..."
    fn kitchen_clusters() -> (Vec<Cluster>, Vec<Cluster>) {
        let raven = [span(0, 0, 0), span(1, 7, 7), span(1, 9, 9), span(2, 2, 2)];
        let roommate = [span(1, 2, 2), span(1, 9, 10), span(2, 6, 6)];
        let tobi = [span(2, 10, 10)];
        let gold = vec![cluster(0, &raven), cluster(1, &roommate), cluster(2, &tobi)];
        let pred = vec![
            cluster(0, &[raven[0], raven[2], raven[3]]),
            cluster(1, &roommate),
            cluster(2, &tobi),
        ];
        (gold, pred)
    }

    #[test]
    fn lea_worked_example() {
        let (gold, pred) = kitchen_clusters();
        let s = lea(&gold, &pred);
        assert!((s.recall - 0.75).abs() < 1e-12);
        assert!((s.precision - 1.0).abs() < 1e-12);
        assert!((s.f1 - 6.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn lea_ignoring_singletons_gives_five_sixths() {
        let (gold, pred) = kitchen_clusters();
        let s = lea_with(
            &gold,
            &pred,
            LeaOptions {
                ignore_singletons: true,
            },
        );
        assert!((s.f1 - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn lea_edge_cases() {
        let (gold, _) = kitchen_clusters();
        assert_eq!(lea(&gold, &gold), LeaScore::new(1.0, 1.0));
        assert_eq!(lea(&[], &[]), LeaScore::new(1.0, 1.0));
        let s = lea(&[], &gold);
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
        let s = lea(&gold, &[]);
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn lea_is_symmetric_under_swap() {
        let (gold, pred) = kitchen_clusters();
        let a = lea(&gold, &pred);
        let b = lea(&pred, &gold);
        assert_eq!((a.precision, a.recall, a.f1), (b.recall, b.precision, b.f1));
    }

    #[test]
    fn aggregate_two_points() {
        let report = |f1: f64| EvalReport {
            lea: LeaScore {
                precision: f1,
                recall: f1,
                f1,
            },
            lea_counts: LeaCounts::default(),
            pronoun: PronounCounts::default(),
            pronoun_score: None,
            averaging: Averaging::Micro,
            documents: 1,
        };
        let agg = aggregate(&[report(0.4), report(0.6)]).unwrap();
        assert!((agg.f1.mean - 0.5).abs() < 1e-12);
        assert!((agg.f1.std - 0.1).abs() < 1e-12);
        assert!(agg.pronoun_score.is_none());

        let one = aggregate(&[report(0.3)]).unwrap();
        assert_eq!(
            one.f1,
            MeanStd {
                mean: 0.3,
                std: 0.0
            }
        );
        assert!(matches!(aggregate(&[]), Err(Error::EmptyInput)));
    }
}
