//! Pronoun paradigms and the gendered-noun rewrite lexicon.

use std::collections::BTreeMap;
use std::io::BufRead;

use crate::conll::{ParseDiagnostic, Severity};
use crate::error::{Error, Result};
use crate::transform::PronounRole;

/// A third-person singular pronoun set: subject, object and possessive form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PronounParadigm {
    pub name: String,
    pub subject: String,
    pub object: String,
    pub possessive: String,
}

impl PronounParadigm {
    pub fn new(name: &str, subject: &str, object: &str, possessive: &str) -> Result<Self> {
        let forms = [name, subject, object, possessive];
        if forms.iter().any(|f| f.trim().is_empty()) {
            return Err(Error::InvalidParadigm(format!(
                "{name}/{subject}/{object}/{possessive}"
            )));
        }
        Ok(PronounParadigm {
            name: name.to_lowercase(),
            subject: subject.to_lowercase(),
            object: object.to_lowercase(),
            possessive: possessive.to_lowercase(),
        })
    }

    pub fn form(&self, role: PronounRole) -> &str {
        match role {
            PronounRole::Subject => &self.subject,
            PronounRole::Object => &self.object,
            PronounRole::Possessive => &self.possessive,
        }
    }
}

const PARADIGMS: [(&str, &str, &str, &str); 10] = [
    ("hij", "hij", "hem", "zijn"),
    ("zij", "zij", "haar", "haar"),
    ("hen", "hen", "hen", "hun"),
    ("die", "die", "hen", "diens"),
    ("dee", "dee", "dem", "dijr"),
    ("dij", "dij", "dem", "dijr"),
    ("nij", "nij", "ner", "nijr"),
    ("vij", "vij", "vijn", "vijns"),
    ("zhij", "zhij", "zhaar", "zhaar"),
    ("zem", "zem", "zeer", "zeer"),
];

pub const GENDERED: [&str; 2] = ["hij", "zij"];
pub const GENDER_NEUTRAL: [&str; 2] = ["hen", "die"];
pub const NEOPRONOUNS: [&str; 6] = ["dee", "dij", "nij", "vij", "zhij", "zem"];

pub fn builtin_paradigms() -> Vec<PronounParadigm> {
    PARADIGMS
        .iter()
        .map(|&(name, subject, object, possessive)| PronounParadigm {
            name: name.to_owned(),
            subject: subject.to_owned(),
            object: object.to_owned(),
            possessive: possessive.to_owned(),
        })
        .collect()
}

/// Looks up a built-in paradigm by name (case-insensitive).
pub fn paradigm(name: &str) -> Result<PronounParadigm> {
    let key = name.to_lowercase();
    builtin_paradigms()
        .into_iter()
        .find(|p| p.name == key)
        .ok_or_else(|| Error::UnknownParadigm(name.to_owned()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NounRewrite {
    pub neutral: String,
    /// The replacement is a hypernym that loses part of the meaning.
    pub lossy: bool,
}

/// Mapping from lowercase gendered nouns to their gender-neutral rewrites.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RewriteLexicon {
    entries: BTreeMap<String, NounRewrite>,
}

impl RewriteLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts an entry, returning the previous rewrite for the key.
    pub fn insert(
        &mut self,
        gendered: &str,
        neutral: &str,
        lossy: bool,
    ) -> Result<Option<NounRewrite>> {
        let key = gendered.trim().to_lowercase();
        let neutral = neutral.trim().to_lowercase();
        if key.is_empty() || neutral.is_empty() {
            return Err(Error::InvalidLexicon("entries must be non-empty".into()));
        }
        if key == neutral {
            return Err(Error::InvalidLexicon(format!(
                "entry `{key}` maps to itself"
            )));
        }
        Ok(self.entries.insert(key, NounRewrite { neutral, lossy }))
    }

    pub fn get(&self, gendered: &str) -> Option<&NounRewrite> {
        self.entries.get(&gendered.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &NounRewrite)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Case-insensitive lookup; the replacement copies the query's casing.
    pub fn lookup(&self, form: &str) -> Option<String> {
        self.get(form).map(|r| match_case(form, &r.neutral))
    }
}

pub fn lookup_noun(lex: &RewriteLexicon, form: &str) -> Option<String> {
    lex.lookup(form)
}

/// Gendered noun rewrites; `true` marks replacements that lose meaning.
const NOUNS: [(&str, &str, bool); 86] = [
    ("tante", "familielid", true),
    ("oom", "familielid", true),
    ("jongen", "kind", false),
    ("meisje", "kind", false),
    ("man", "persoon", false),
    ("vrouw", "persoon", false),
    ("mannen", "personen", false),
    ("vrouwen", "personen", false),
    ("broer", "familielid", true),
    ("zus", "familielid", true),
    ("broertje", "familielid", true),
    ("zusje", "familielid", true),
    ("broertjes", "familieleden", true),
    ("zusjes", "familieleden", true),
    ("broers", "familieleden", true),
    ("zussen", "familieleden", true),
    ("meid", "persoon", false),
    ("vader", "ouder", false),
    ("moeder", "ouder", false),
    ("vaders", "ouders", false),
    ("moeders", "ouders", false),
    ("zoon", "kind", false),
    ("zonen", "kinderen", false),
    ("dochter", "kind", false),
    ("dochters", "kinderen", false),
    ("nicht", "familielid", true),
    ("nichtje", "familielid", true),
    ("nichtjes", "familieleden", true),
    ("nichten", "familieleden", true),
    ("neef", "familielid", true),
    ("neefje", "familielid", true),
    ("neefjes", "familieleden", true),
    ("kleindochter", "kleinkind", false),
    ("kleinzoon", "kleinkind", false),
    ("kleindochters", "kleinkinderen", false),
    ("kleinzonen", "kleinkinderen", false),
    ("oma", "grootouder", false),
    ("opa", "grootouder", false),
    ("grootmoeder", "grootouder", false),
    ("grootvader", "grootouder", false),
    ("dame", "persoon", false),
    ("heer", "persoon", false),
    ("dames", "personen", false),
    ("heren", "personen", false),
    ("koning", "staatshoofd", false),
    ("koningin", "staatshoofd", false),
    ("koningen", "staatshoofden", false),
    ("koninginnen", "staatshoofden", false),
    ("mevrouw", "persoon", true),
    ("meneer", "persoon", true),
    ("jongedame", "jongere", true),
    ("jongeman", "jongere", true),
    ("politieman", "politieagent", false),
    ("politievrouw", "politieagent", false),
    ("brandweerman", "brandweermens", false),
    ("brandweervrouw", "brandweermens", false),
    ("prinses", "edele", true),
    ("prins", "edele", true),
    ("prinsessen", "edelen", true),
    ("prinsen", "edelen", true),
    ("kroonprins", "troonopvolger", false),
    ("kroonprinses", "troonopvolger", false),
    ("schrijver", "auteur", false),
    ("schrijfster", "auteur", false),
    ("juf", "leerkracht", false),
    ("meester", "leerkracht", false),
    ("leraar", "leerkracht", false),
    ("lerares", "leerkracht", false),
    ("bruid", "jonggehuwde", false),
    ("bruidegom", "jonggehuwde", false),
    ("tovenaar", "magiër", false),
    ("heks", "magiër", false),
    ("stiefvader", "stiefouder", false),
    ("stiefmoeder", "stiefouder", false),
    ("stiefzoon", "stiefkind", false),
    ("stiefdochter", "stiefkind", false),
    ("weduwe", "nabestaande", true),
    ("weduwnaar", "nabestaande", true),
    ("kok", "chef", false),
    ("kokkin", "chef", false),
    ("kunstenaar", "artiest", false),
    ("kunstenaares", "artiest", false),
    ("vriend", "maat", true),
    ("vriendin", "maat", true),
    ("vriendje", "partner", true),
    ("vriendinnetje", "partner", true),
];

pub fn builtin_noun_lexicon() -> RewriteLexicon {
    RewriteLexicon {
        entries: NOUNS
            .iter()
            .map(|&(g, n, lossy)| {
                (
                    g.to_owned(),
                    NounRewrite {
                        neutral: n.to_owned(),
                        lossy,
                    },
                )
            })
            .collect(),
    }
}

/// Reads a lexicon from `gendered<TAB>neutral<TAB>0|1` lines.
///
/// Blank lines and lines starting with `#` are skipped. A repeated key
/// replaces the earlier entry and produces a warning.
pub fn load_noun_lexicon<R: BufRead>(reader: R) -> Result<(RewriteLexicon, Vec<ParseDiagnostic>)> {
    let mut lex = RewriteLexicon::new();
    let mut warnings = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_number = i + 1;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            line: line_number,
            message,
        };
        let cols: Vec<&str> = line.split('\t').collect();
        let [gendered, neutral, flag] = cols[..] else {
            return Err(parse_err(format!(
                "expected 3 tab-separated columns, found {}",
                cols.len()
            )));
        };
        let lossy = match flag.trim() {
            "0" => false,
            "1" => true,
            other => {
                return Err(parse_err(format!(
                    "lossy flag must be 0 or 1, found `{other}`"
                )))
            }
        };
        match lex.insert(gendered, neutral, lossy) {
            Ok(Some(_)) => warnings.push(ParseDiagnostic {
                line_number,
                severity: Severity::Warning,
                message: format!(
                    "duplicate entry `{}` replaces the earlier one",
                    gendered.trim()
                ),
            }),
            Ok(None) => {}
            Err(e) => return Err(parse_err(e.to_string())),
        }
    }
    Ok((lex, warnings))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Casing {
    Lower,
    Capitalized,
    Upper,
    Mixed,
}

fn casing(s: &str) -> Casing {
    let cased: Vec<char> = s
        .chars()
        .filter(|c| c.is_lowercase() || c.is_uppercase())
        .collect();
    match cased.as_slice() {
        [] => Casing::Lower,
        [first, rest @ ..] => {
            if first.is_uppercase() {
                if rest.is_empty() || rest.iter().all(|c| c.is_lowercase()) {
                    Casing::Capitalized
                } else if rest.iter().all(|c| c.is_uppercase()) {
                    Casing::Upper
                } else {
                    Casing::Mixed
                }
            } else if rest.iter().all(|c| c.is_lowercase()) {
                Casing::Lower
            } else {
                Casing::Mixed
            }
        }
    }
}

/// Renders the lowercase `replacement` in the capitalisation pattern of
/// `query`: initial capital and all caps carry over, anything else yields
/// lowercase.
pub fn match_case(query: &str, replacement: &str) -> String {
    let lower = replacement.to_lowercase();
    match casing(query) {
        Casing::Lower | Casing::Mixed => lower,
        Casing::Upper => lower.to_uppercase(),
        Casing::Capitalized => {
            let mut chars = lower.chars();
            match chars.next() {
                Some(first) => first.to_uppercase().chain(chars).collect(),
                None => lower,
            }
        }
    }
}
