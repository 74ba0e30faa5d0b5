//! Pronoun frequency tables and corpus-level pronoun proportions.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::model::{Corpus, Document, Token};
use crate::transform::{ClassifierConfig, PronounFunction};

/// Occurrences of one form split by grammatical function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FunctionCounts {
    pub personal_subject: usize,
    pub personal_object: usize,
    pub possessive: usize,
    pub relative: usize,
    pub demonstrative: usize,
    pub other: usize,
}

impl FunctionCounts {
    pub fn add(&mut self, function: PronounFunction) {
        let slot = match function {
            PronounFunction::PersonalSubject => &mut self.personal_subject,
            PronounFunction::PersonalObject => &mut self.personal_object,
            PronounFunction::Possessive => &mut self.possessive,
            PronounFunction::Relative => &mut self.relative,
            PronounFunction::Demonstrative => &mut self.demonstrative,
            PronounFunction::Other => &mut self.other,
        };
        *slot += 1;
    }

    pub fn get(&self, function: PronounFunction) -> usize {
        match function {
            PronounFunction::PersonalSubject => self.personal_subject,
            PronounFunction::PersonalObject => self.personal_object,
            PronounFunction::Possessive => self.possessive,
            PronounFunction::Relative => self.relative,
            PronounFunction::Demonstrative => self.demonstrative,
            PronounFunction::Other => self.other,
        }
    }

    pub fn total(&self) -> usize {
        self.personal_subject
            + self.personal_object
            + self.possessive
            + self.relative
            + self.demonstrative
            + self.other
    }

    fn merge(&mut self, other: &FunctionCounts) {
        self.personal_subject += other.personal_subject;
        self.personal_object += other.personal_object;
        self.possessive += other.possessive;
        self.relative += other.relative;
        self.demonstrative += other.demonstrative;
        self.other += other.other;
    }
}

pub const FUNCTIONS: [PronounFunction; 6] = [
    PronounFunction::PersonalSubject,
    PronounFunction::PersonalObject,
    PronounFunction::Possessive,
    PronounFunction::Relative,
    PronounFunction::Demonstrative,
    PronounFunction::Other,
];

fn function_label(f: PronounFunction) -> &'static str {
    match f {
        PronounFunction::PersonalSubject => "personal_subject",
        PronounFunction::PersonalObject => "personal_object",
        PronounFunction::Possessive => "possessive",
        PronounFunction::Relative => "relative",
        PronounFunction::Demonstrative => "demonstrative",
        PronounFunction::Other => "other",
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormFrequency {
    /// Lowercased form.
    pub form: String,
    pub counts: FunctionCounts,
    /// Occurrences that are third-person singular personal or possessive
    /// pronouns.
    pub third_singular: usize,
}

impl FormFrequency {
    pub fn total(&self) -> usize {
        self.counts.total()
    }

    /// True when the form occurs but never as a third-person singular pronoun.
    pub fn never_third_singular(&self) -> bool {
        self.total() > 0 && self.third_singular == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CorpusTotals {
    pub tokens: usize,
    /// Personal and possessive pronouns.
    pub pronouns: usize,
    /// Third-person singular pronouns among `pronouns`.
    pub third_singular: usize,
    /// Masculine pronouns among `third_singular`.
    pub masculine: usize,
}

fn share(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl CorpusTotals {
    pub fn pronoun_proportion(&self) -> f64 {
        share(self.pronouns, self.tokens)
    }

    pub fn third_singular_share(&self) -> f64 {
        share(self.third_singular, self.pronouns)
    }

    pub fn masculine_share(&self) -> f64 {
        share(self.masculine, self.third_singular)
    }

    fn merge(self, o: CorpusTotals) -> CorpusTotals {
        CorpusTotals {
            tokens: self.tokens + o.tokens,
            pronouns: self.pronouns + o.pronouns,
            third_singular: self.third_singular + o.third_singular,
            masculine: self.masculine + o.masculine,
        }
    }

    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        writeln!(out, "tokens={}", self.tokens).unwrap();
        writeln!(out, "pronouns={}", self.pronouns).unwrap();
        writeln!(out, "third_singular={}", self.third_singular).unwrap();
        writeln!(out, "masculine={}", self.masculine).unwrap();
        writeln!(out, "pronoun_proportion={:.6}", self.pronoun_proportion()).unwrap();
        writeln!(
            out,
            "third_singular_share={:.6}",
            self.third_singular_share()
        )
        .unwrap();
        writeln!(out, "masculine_share={:.6}", self.masculine_share()).unwrap();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FrequencyReport {
    /// In the order the forms were requested, duplicates removed.
    pub forms: Vec<FormFrequency>,
    pub totals: CorpusTotals,
}

fn is_pronoun(function: PronounFunction) -> bool {
    matches!(
        function,
        PronounFunction::PersonalSubject
            | PronounFunction::PersonalObject
            | PronounFunction::Possessive
    )
}

fn doc_totals(doc: &Document, cfg: &ClassifierConfig) -> CorpusTotals {
    let mut t = CorpusTotals::default();
    for token in doc.tokens() {
        t.tokens += 1;
        if !is_pronoun(cfg.function(token)) {
            continue;
        }
        t.pronouns += 1;
        if cfg.is_third_singular(token) {
            t.third_singular += 1;
            t.masculine += usize::from(cfg.is_masculine(token));
        }
    }
    t
}

/// Token count and pronoun proportions over the whole corpus.
pub fn corpus_summary(corpus: &Corpus, cfg: &ClassifierConfig) -> CorpusTotals {
    corpus
        .documents
        .par_iter()
        .map(|d| doc_totals(d, cfg))
        .reduce(CorpusTotals::default, CorpusTotals::merge)
}

type FormTable = BTreeMap<String, (FunctionCounts, usize)>;

fn count_forms(doc: &Document, wanted: &[String], cfg: &ClassifierConfig) -> FormTable {
    let mut table = FormTable::new();
    for token in doc.tokens() {
        let form = token.form.to_lowercase();
        if !wanted.contains(&form) {
            continue;
        }
        let entry = table.entry(form).or_default();
        let function = cfg.function(token);
        entry.0.add(function);
        entry.1 += usize::from(is_third_singular_pronoun(token, function, cfg));
    }
    table
}

fn is_third_singular_pronoun(
    token: &Token,
    function: PronounFunction,
    cfg: &ClassifierConfig,
) -> bool {
    is_pronoun(function) && cfg.is_third_singular(token)
}

/// Case-insensitive occurrence counts of `forms`, broken down by function,
/// together with the corpus totals.
pub fn pronoun_frequencies(
    corpus: &Corpus,
    forms: &[&str],
    cfg: &ClassifierConfig,
) -> FrequencyReport {
    let mut wanted: Vec<String> = Vec::new();
    for f in forms {
        let f = f.to_lowercase();
        if !wanted.contains(&f) {
            wanted.push(f);
        }
    }
    let table = corpus
        .documents
        .par_iter()
        .map(|d| count_forms(d, &wanted, cfg))
        .reduce(FormTable::new, |mut a, b| {
            for (form, (counts, third)) in b {
                let e = a.entry(form).or_default();
                e.0.merge(&counts);
                e.1 += third;
            }
            a
        });
    let forms = wanted
        .into_iter()
        .map(|form| {
            let (counts, third_singular) = table.get(&form).copied().unwrap_or_default();
            FormFrequency {
                form,
                counts,
                third_singular,
            }
        })
        .collect();
    FrequencyReport {
        forms,
        totals: corpus_summary(corpus, cfg),
    }
}

impl FrequencyReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let width = self
            .forms
            .iter()
            .map(|f| f.form.len())
            .max()
            .unwrap_or(0)
            .max(4)
            + 2;
        write!(out, "{:<width$}", "form").unwrap();
        for f in FUNCTIONS {
            write!(out, "{:>18}", function_label(f)).unwrap();
        }
        writeln!(out, "{:>10}{:>16}", "total", "third_singular").unwrap();
        for row in &self.forms {
            write!(out, "{:<width$}", row.form).unwrap();
            for f in FUNCTIONS {
                write!(out, "{:>18}", row.counts.get(f)).unwrap();
            }
            let flag = if row.never_third_singular() { " *" } else { "" };
            writeln!(out, "{:>10}{:>16}{flag}", row.total(), row.third_singular).unwrap();
        }
        if self.forms.iter().any(FormFrequency::never_third_singular) {
            writeln!(out, "* never used as a third-person singular pronoun").unwrap();
        }
        out
    }

    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        for row in &self.forms {
            for f in FUNCTIONS {
                writeln!(
                    out,
                    "form.{}.{}={}",
                    row.form,
                    function_label(f),
                    row.counts.get(f)
                )
                .unwrap();
            }
            writeln!(out, "form.{}.total={}", row.form, row.total()).unwrap();
            writeln!(
                out,
                "form.{}.third_singular={}",
                row.form, row.third_singular
            )
            .unwrap();
        }
        out.push_str(&self.totals.to_key_values());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLUR_OBJ: &str = "Case=Acc|Number=Plur|Person=3|PronType=Prs";
    const MASC: &str = "Case=Nom|Gender=Masc|Number=Sing|Person=3|PronType=Prs";
    const FEM: &str = "Case=Nom|Gender=Fem|Number=Sing|Person=3|PronType=Prs";

    fn corpus(tokens: Vec<(&str, &str, &str)>, padding: usize) -> Corpus {
        let mut sentence: Vec<Token> = tokens
            .into_iter()
            .enumerate()
            .map(|(i, (form, pos, feats))| Token::new(0, i, form).with_pos(pos).with_feats(feats))
            .collect();
        for _ in 0..padding {
            let i = sentence.len();
            sentence.push(Token::new(0, i, "woord").with_pos("NOUN"));
        }
        Corpus::new(vec![Document::new("d", vec![sentence], vec![]).unwrap()]).unwrap()
    }

    #[test]
    fn plural_hen_is_never_third_singular() {
        let c = corpus(
            vec![
                ("hen", "PRON", PLUR_OBJ),
                ("Hen", "PRON", PLUR_OBJ),
                ("HEN", "PRON", PLUR_OBJ),
            ],
            0,
        );
        let report = pronoun_frequencies(&c, &["hen", "die"], &ClassifierConfig::default());
        let hen = &report.forms[0];
        assert_eq!(hen.total(), 3);
        assert_eq!(hen.counts.personal_object, 3);
        assert_eq!(hen.third_singular, 0);
        assert!(hen.never_third_singular());
        assert_eq!(report.forms[1].total(), 0);
        assert!(!report.forms[1].never_third_singular());
    }

    #[test]
    fn proportions() {
        let c = corpus(vec![("hij", "PRON", MASC), ("zij", "PRON", FEM)], 98);
        let t = corpus_summary(&c, &ClassifierConfig::default());
        assert_eq!(t.tokens, 100);
        assert!((t.pronoun_proportion() - 0.02).abs() < 1e-12);

        let c = corpus(
            vec![
                ("hij", "PRON", MASC),
                ("hij", "PRON", MASC),
                ("hij", "PRON", MASC),
                ("zij", "PRON", FEM),
            ],
            0,
        );
        assert!(
            (corpus_summary(&c, &ClassifierConfig::default()).masculine_share() - 0.75).abs()
                < 1e-12
        );
    }

    #[test]
    fn empty_corpus_is_all_zero() {
        let c = Corpus::default();
        let report = pronoun_frequencies(&c, &["hen"], &ClassifierConfig::default());
        assert_eq!(report.totals, CorpusTotals::default());
        assert_eq!(report.totals.pronoun_proportion(), 0.0);
        assert_eq!(report.forms[0].total(), 0);
    }
}
