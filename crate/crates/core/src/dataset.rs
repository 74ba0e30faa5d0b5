//! Corpus-level dataset construction.
//!
//! All randomness comes from a ChaCha8 stream seeded with the caller's seed
//! and is consumed in a single planning pass over the corpus in document
//! order; the per-document rewriting afterwards is deterministic and runs in
//! parallel.

use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lexicon::{paradigm, PronounParadigm, RewriteLexicon, NEOPRONOUNS};
use crate::model::Corpus;
use crate::transform::{pronoun_specific, ClassifierConfig, TransformOptions};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Which paradigm each document was rewritten with, in corpus order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParadigmAssignment {
    pub entries: Vec<(String, String)>,
}

pub type CdaAssignment = ParadigmAssignment;

impl ParadigmAssignment {
    pub fn get(&self, doc_id: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(id, _)| id == doc_id)
            .map(|(_, p)| p.as_str())
    }

    pub fn count(&self, paradigm: &str) -> usize {
        self.entries.iter().filter(|(_, p)| p == paradigm).count()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `doc_id<TAB>paradigm` lines.
    pub fn to_tsv(&self) -> String {
        self.entries
            .iter()
            .map(|(id, p)| format!("{id}\t{p}\n"))
            .collect()
    }
}

fn rewrite_all(
    corpus: &Corpus,
    paradigms: &[PronounParadigm],
    cfg: &ClassifierConfig,
    lex: &RewriteLexicon,
    options: TransformOptions,
) -> Corpus {
    Corpus {
        documents: corpus
            .documents
            .par_iter()
            .zip(paradigms.par_iter())
            .map(|(doc, p)| pronoun_specific(doc, Some(p), cfg, lex, options))
            .collect(),
        split_label: corpus.split_label.clone(),
    }
}

/// Counterfactual augmentation: half of the documents (chosen by a seeded
/// shuffle) get *hen*, the rest *die*. With an odd count *hen* gets the
/// extra document. Output order follows the input.
pub fn build_cda(
    corpus: &Corpus,
    seed: u64,
    cfg: &ClassifierConfig,
    lex: &RewriteLexicon,
    options: TransformOptions,
) -> Result<(Corpus, CdaAssignment)> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput);
    }
    let hen = paradigm("hen")?;
    let die = paradigm("die")?;
    let n = corpus.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng(seed));

    let mut chosen = vec![die.clone(); n];
    for &i in &order[..n.div_ceil(2)] {
        chosen[i] = hen.clone();
    }
    let assignment = ParadigmAssignment {
        entries: corpus
            .documents
            .iter()
            .zip(&chosen)
            .map(|(d, p)| (d.id.clone(), p.name.clone()))
            .collect(),
    };
    Ok((rewrite_all(corpus, &chosen, cfg, lex, options), assignment))
}

/// An exact fraction in `(0, 1]`.
///
/// Parsed from a decimal (`0.0125`), a percentage (`1.25%`) or a ratio
/// (`1/80`), so that floor rounding is never disturbed by binary floating
/// point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fraction {
    numerator: u64,
    denominator: u64,
}

impl Fraction {
    pub fn new(numerator: u64, denominator: u64) -> Result<Self> {
        if denominator == 0 || numerator == 0 || numerator > denominator {
            return Err(Error::InvalidFraction(format!("{numerator}/{denominator}")));
        }
        Ok(Fraction {
            numerator,
            denominator,
        })
    }

    /// `floor(self * n)`.
    pub fn floor_of(&self, n: usize) -> usize {
        (n as u128 * self.numerator as u128 / self.denominator as u128) as usize
    }

    pub fn as_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

fn parse_decimal(s: &str) -> Option<(u64, u64)> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) || frac.len() > 15 {
        return None;
    }
    let scale = 10u64.checked_pow(frac.len() as u32)?;
    let int: u64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let frac: u64 = if frac.is_empty() {
        0
    } else {
        frac.parse().ok()?
    };
    Some((int.checked_mul(scale)?.checked_add(frac)?, scale))
}

impl FromStr for Fraction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let invalid = || Error::InvalidFraction(s.to_owned());
        let t = s.trim();
        let (num, den) = if let Some((a, b)) = t.split_once('/') {
            (
                a.trim().parse().map_err(|_| invalid())?,
                b.trim().parse().map_err(|_| invalid())?,
            )
        } else if let Some(p) = t.strip_suffix('%') {
            let (num, den) = parse_decimal(p.trim()).ok_or_else(invalid)?;
            (num, den.checked_mul(100).ok_or_else(invalid)?)
        } else {
            parse_decimal(t).ok_or_else(invalid)?
        };
        Fraction::new(num, den).map_err(|_| invalid())
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionSize {
    /// `floor(fraction * corpus size)` documents.
    Fraction(Fraction),
    Count(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionSpec {
    pub size: PartitionSize,
    pub n_partitions: usize,
    pub seed: u64,
}

/// Draws `n_partitions` independent subsets of document ids. Each subset is
/// sampled without replacement; different subsets may overlap. Ids within a
/// subset are listed in corpus order.
pub fn sample_partitions(corpus: &Corpus, spec: &PartitionSpec) -> Result<Vec<Vec<String>>> {
    let n = corpus.len();
    let size = match spec.size {
        PartitionSize::Fraction(f) => f.floor_of(n),
        PartitionSize::Count(k) => k,
    };
    if size == 0 || size > n {
        return Err(Error::DegenerateFraction {
            size,
            corpus_size: n,
        });
    }
    if spec.n_partitions == 0 {
        return Err(Error::EmptyInput);
    }
    let mut rng = rng(spec.seed);
    Ok((0..spec.n_partitions)
        .map(|_| {
            let mut picked = index::sample(&mut rng, n, size).into_vec();
            picked.sort_unstable();
            picked
                .into_iter()
                .map(|i| corpus.documents[i].id.clone())
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnseenMode {
    /// Each document independently gets one of the six neopronouns.
    PerDocument,
    /// One registry paradigm for the whole corpus.
    Fixed(String),
}

/// Rewrites the corpus with neopronouns that a model has not seen in
/// training.
pub fn build_unseen(
    corpus: &Corpus,
    seed: u64,
    mode: &UnseenMode,
    cfg: &ClassifierConfig,
    lex: &RewriteLexicon,
    options: TransformOptions,
) -> Result<(Corpus, ParadigmAssignment)> {
    let chosen: Vec<PronounParadigm> = match mode {
        UnseenMode::Fixed(name) => vec![paradigm(name)?; corpus.len()],
        UnseenMode::PerDocument => {
            let pool: Vec<PronounParadigm> = NEOPRONOUNS
                .iter()
                .map(|n| paradigm(n))
                .collect::<Result<_>>()?;
            let mut rng = rng(seed);
            (0..corpus.len())
                .map(|_| pool[rng.random_range(0..pool.len())].clone())
                .collect()
        }
    };
    let assignment = ParadigmAssignment {
        entries: corpus
            .documents
            .iter()
            .zip(&chosen)
            .map(|(d, p)| (d.id.clone(), p.name.clone()))
            .collect(),
    };
    Ok((rewrite_all(corpus, &chosen, cfg, lex, options), assignment))
}
