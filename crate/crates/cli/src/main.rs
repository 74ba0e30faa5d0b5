use std::fs;
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use corefkit::conll::{
    parse_corpus, serialize_corpus, strip_singletons, ParseDiagnostic, Severity,
};
use corefkit::dataset::{
    build_cda, build_unseen, sample_partitions, Fraction, PartitionSize, PartitionSpec, UnseenMode,
};
use corefkit::lexicon::{
    builtin_noun_lexicon, builtin_paradigms, load_noun_lexicon, paradigm, RewriteLexicon,
};
use corefkit::metrics::{aggregate, evaluate, Averaging, EvalOptions, EvalReport, LeaOptions};
use corefkit::model::Corpus;
use corefkit::resolver::{resolve, ResolverConfig};
use corefkit::stats::pronoun_frequencies;
use corefkit::transform::{
    classify_pronoun, delexicalize, pronoun_specific, ClassifierConfig, TransformOptions,
};

const PARADIGM_NAMES: [&str; 10] = [
    "hij", "zij", "hen", "die", "dee", "dij", "nij", "vij", "zhij", "zem",
];

#[derive(Parser, Debug)]
#[command(
    name = "corefkit",
    version,
    about = "Build gender-inclusive coreference corpora and score resolvers on them"
)]
struct Cli {
    /// Worker threads for per-document work (default: all cores). Output
    /// does not depend on this value.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Tagset description for pronoun and noun classification.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Gendered-noun rewrite table (TSV) replacing the built-in one.
    #[arg(long, global = true, value_name = "FILE")]
    lexicon: Option<PathBuf>,

    /// Fail when the input has documents that had to be skipped.
    #[arg(long, global = true)]
    strict: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Io {
    /// Input corpus; `-` or omitted reads standard input.
    input: Option<PathBuf>,

    /// Output file; standard output when omitted.
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Copy)]
struct RewriteFlags {
    /// Replace person names with ANON_x tags.
    #[arg(long)]
    anonymize: bool,

    /// Replace gendered nouns with neutral ones.
    #[arg(long)]
    neutralize_nouns: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pronoun frequency table and corpus-level pronoun proportions.
    Stats {
        #[command(flatten)]
        io: Io,
        /// Forms to tabulate (default: every gender-neutral and neopronoun form).
        #[arg(long, value_delimiter = ',')]
        forms: Vec<String>,
    },
    /// Drop clusters with a single mention.
    StripSingletons {
        #[command(flatten)]
        io: Io,
    },
    /// Rewrite third-person singular pronouns with one paradigm.
    Transform {
        #[command(flatten)]
        io: Io,
        /// Target paradigm, or `baseline` to keep the original pronouns.
        #[arg(long, value_parser = paradigm_or_baseline())]
        paradigm: String,
        #[command(flatten)]
        rewrite: RewriteFlags,
    },
    /// Replace pronouns with <SUBJ>, <OBJ> and <POSS>.
    Delex {
        #[command(flatten)]
        io: Io,
    },
    /// Counterfactual augmentation: half hen, half die.
    Cda {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the document-to-paradigm table here.
        #[arg(long, value_name = "FILE")]
        assignments: Option<PathBuf>,
        /// Only swap pronouns; keep names and nouns.
        #[arg(long)]
        pronouns_only: bool,
    },
    /// Draw random training subsets of the corpus.
    Sample {
        /// Input corpus; `-` or omitted reads standard input.
        input: Option<PathBuf>,
        /// Share of the corpus per partition (`0.1`, `10%` or `1/10`), rounded down.
        #[arg(long, conflicts_with = "count", required_unless_present = "count")]
        fraction: Option<Fraction>,
        /// Exact number of documents per partition.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, default_value_t = 5)]
        partitions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Receives partition_<i>.ids, one document id per line.
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
        /// Also write partition_<i>.conll with the selected documents.
        #[arg(long)]
        write_corpora: bool,
    },
    /// Rewrite with neopronouns the model has not seen.
    Unseen {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use this paradigm for every document instead of a random neopronoun.
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PARADIGM_NAMES))]
        fixed: Option<String>,
        #[arg(long, value_name = "FILE")]
        assignments: Option<PathBuf>,
        #[arg(long)]
        pronouns_only: bool,
    },
    /// Predict clusters with the rule-based resolver.
    ResolveBaseline {
        #[command(flatten)]
        io: Io,
        /// How many sentences back a pronoun may look for a name.
        #[arg(long, default_value_t = 2)]
        window: usize,
        #[arg(long)]
        no_string_match: bool,
    },
    /// LEA and pronoun score of predictions against gold; several --pred
    /// files are summarised by mean and standard deviation.
    Score {
        #[arg(long, value_name = "FILE")]
        gold: PathBuf,
        #[arg(long, value_name = "FILE", required = true)]
        pred: Vec<PathBuf>,
        /// Average the pronoun score over documents instead of pooling counts.
        #[arg(long = "macro")]
        macro_average: bool,
        #[arg(long)]
        ignore_singletons: bool,
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Print the running text of each document.
    Render {
        #[command(flatten)]
        io: Io,
    },
}

fn paradigm_or_baseline() -> clap::builder::PossibleValuesParser {
    let mut names = PARADIGM_NAMES.to_vec();
    names.push("baseline");
    clap::builder::PossibleValuesParser::new(names)
}

struct Setup {
    cfg: ClassifierConfig,
    lex: RewriteLexicon,
    strict: bool,
}

fn report_diagnostics(
    source: &str,
    diagnostics: &[ParseDiagnostic],
    strict: bool,
) -> anyhow::Result<()> {
    for d in diagnostics {
        eprintln!("{source}: {d}");
    }
    if strict && diagnostics.iter().any(|d| d.severity == Severity::Error) {
        bail!("{source}: documents were skipped and --strict is set");
    }
    Ok(())
}

fn read_corpus(input: Option<&Path>, strict: bool) -> anyhow::Result<Corpus> {
    let (corpus, diagnostics, source) = match input {
        None => {
            let mut text = String::new();
            io::stdin()
                .read_to_string(&mut text)
                .context("reading standard input")?;
            let (c, d) = corefkit::parse_corpus_str(&text)?;
            (c, d, "<stdin>".to_owned())
        }
        Some(p) if p == Path::new("-") => return read_corpus(None, strict),
        Some(p) => {
            let file = fs::File::open(p).with_context(|| format!("opening {}", p.display()))?;
            let (c, d) = parse_corpus(BufReader::new(file))
                .with_context(|| format!("reading {}", p.display()))?;
            (c, d, p.display().to_string())
        }
    };
    report_diagnostics(&source, &diagnostics, strict)?;
    Ok(corpus)
}

/// Collected output; nothing is written until the command has succeeded.
#[derive(Default)]
struct Outputs {
    dirs: Vec<PathBuf>,
    files: Vec<(PathBuf, String)>,
    stdout: String,
}

impl Outputs {
    fn main(&mut self, target: Option<&Path>, text: String) {
        match target {
            Some(p) => self.files.push((p.to_owned(), text)),
            None => self.stdout.push_str(&text),
        }
    }

    fn flush(self) -> anyhow::Result<()> {
        for dir in &self.dirs {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        for (path, text) in &self.files {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        let mut out = io::stdout().lock();
        out.write_all(self.stdout.as_bytes())?;
        out.flush()?;
        Ok(())
    }
}

fn load_context(cli: &Cli) -> anyhow::Result<Setup> {
    let cfg = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            ClassifierConfig::parse(&text).with_context(|| format!("in {}", p.display()))?
        }
        None => ClassifierConfig::default(),
    };
    let lex = match &cli.lexicon {
        Some(p) => {
            let file = fs::File::open(p).with_context(|| format!("opening {}", p.display()))?;
            let (lex, diagnostics) = load_noun_lexicon(BufReader::new(file))
                .with_context(|| format!("in {}", p.display()))?;
            report_diagnostics(&p.display().to_string(), &diagnostics, false)?;
            lex
        }
        None => builtin_noun_lexicon(),
    };
    Ok(Setup {
        cfg,
        lex,
        strict: cli.strict,
    })
}

fn default_stat_forms() -> Vec<String> {
    let mut forms: Vec<String> = Vec::new();
    for p in builtin_paradigms()
        .iter()
        .filter(|p| p.name != "hij" && p.name != "zij")
    {
        for f in [&p.subject, &p.object, &p.possessive] {
            if !forms.contains(f) {
                forms.push(f.clone());
            }
        }
    }
    forms
}

fn rewrite_options(pronouns_only: bool) -> TransformOptions {
    if pronouns_only {
        TransformOptions::default()
    } else {
        TransformOptions::all()
    }
}

fn run(cli: Cli) -> anyhow::Result<Outputs> {
    let ctx = load_context(&cli)?;
    let mut out = Outputs::default();
    match cli.command {
        Command::Stats { io, forms } => {
            let corpus = read_corpus(io.input.as_deref(), ctx.strict)?;
            let forms = if forms.is_empty() {
                default_stat_forms()
            } else {
                forms
            };
            let refs: Vec<&str> = forms.iter().map(String::as_str).collect();
            let report = pronoun_frequencies(&corpus, &refs, &ctx.cfg);
            out.main(
                io.output.as_deref(),
                format!("{}\n{}", report.to_table(), report.to_key_values()),
            );
        }
        Command::StripSingletons { io } => {
            let corpus = read_corpus(io.input.as_deref(), ctx.strict)?;
            out.main(
                io.output.as_deref(),
                serialize_corpus(&corpus.map_documents(strip_singletons))?,
            );
        }
        Command::Transform {
            io,
            paradigm: name,
            rewrite,
        } => {
            let corpus = read_corpus(io.input.as_deref(), ctx.strict)?;
            let target = if name == "baseline" {
                None
            } else {
                Some(paradigm(&name)?)
            };
            let options = TransformOptions {
                anonymize: rewrite.anonymize,
                neutralize_nouns: rewrite.neutralize_nouns,
            };
            let result = corpus.map_documents(|d| {
                pronoun_specific(d, target.as_ref(), &ctx.cfg, &ctx.lex, options)
            });
            out.main(io.output.as_deref(), serialize_corpus(&result)?);
        }
        Command::Delex { io } => {
            let corpus = read_corpus(io.input.as_deref(), ctx.strict)?;
            out.main(
                io.output.as_deref(),
                serialize_corpus(&corpus.map_documents(|d| delexicalize(d, &ctx.cfg)))?,
            );
        }
        Command::Cda {
            io,
            seed,
            assignments,
            pronouns_only,
        } => {
            let corpus = read_corpus(io.input.as_deref(), ctx.strict)?;
            let (result, assignment) = build_cda(
                &corpus,
                seed,
                &ctx.cfg,
                &ctx.lex,
                rewrite_options(pronouns_only),
            )?;
            out.main(io.output.as_deref(), serialize_corpus(&result)?);
            if let Some(p) = assignments {
                out.files.push((p, assignment.to_tsv()));
            }
        }
        Command::Sample {
            input,
            fraction,
            count,
            partitions,
            seed,
            out_dir,
            write_corpora,
        } => {
            let corpus = read_corpus(input.as_deref(), ctx.strict)?;
            let size = match (fraction, count) {
                (Some(f), _) => PartitionSize::Fraction(f),
                (None, Some(k)) => PartitionSize::Count(k),
                (None, None) => unreachable!("clap requires one of --fraction and --count"),
            };
            let spec = PartitionSpec {
                size,
                n_partitions: partitions,
                seed,
            };
            let sets = sample_partitions(&corpus, &spec)?;
            out.dirs.push(out_dir.clone());
            for (i, ids) in sets.iter().enumerate() {
                let mut listing = ids.join("\n");
                listing.push('\n');
                out.files
                    .push((out_dir.join(format!("partition_{}.ids", i + 1)), listing));
                if write_corpora {
                    let docs = ids
                        .iter()
                        .map(|id| corpus.get(id).unwrap().clone())
                        .collect();
                    let mut subset = Corpus::new(docs)?;
                    subset.split_label = corpus.split_label.clone();
                    out.files.push((
                        out_dir.join(format!("partition_{}.conll", i + 1)),
                        serialize_corpus(&subset)?,
                    ));
                }
            }
            for (i, ids) in sets.iter().enumerate() {
                eprintln!("partition {}: {} documents", i + 1, ids.len());
            }
        }
        Command::Unseen {
            io,
            seed,
            fixed,
            assignments,
            pronouns_only,
        } => {
            let corpus = read_corpus(io.input.as_deref(), ctx.strict)?;
            let mode = fixed.map_or(UnseenMode::PerDocument, UnseenMode::Fixed);
            let (result, assignment) = build_unseen(
                &corpus,
                seed,
                &mode,
                &ctx.cfg,
                &ctx.lex,
                rewrite_options(pronouns_only),
            )?;
            out.main(io.output.as_deref(), serialize_corpus(&result)?);
            if let Some(p) = assignments {
                out.files.push((p, assignment.to_tsv()));
            }
        }
        Command::ResolveBaseline {
            io,
            window,
            no_string_match,
        } => {
            let corpus = read_corpus(io.input.as_deref(), ctx.strict)?;
            let rcfg = ResolverConfig {
                pronoun_window_sentences: window,
                enable_string_match: !no_string_match,
            };
            out.main(
                io.output.as_deref(),
                serialize_corpus(&corpus.map_documents(|d| resolve(d, &ctx.cfg, &rcfg)))?,
            );
        }
        Command::Score {
            gold,
            pred,
            macro_average,
            ignore_singletons,
            output,
        } => {
            let gold_corpus = read_corpus(Some(&gold), ctx.strict)?;
            let options = EvalOptions {
                lea: LeaOptions { ignore_singletons },
                averaging: if macro_average {
                    Averaging::Macro
                } else {
                    Averaging::Micro
                },
            };
            let counted = |t: &corefkit::Token| classify_pronoun(t, &ctx.cfg).is_some();
            let reports = pred
                .iter()
                .map(|p| {
                    let pred_corpus = read_corpus(Some(p), ctx.strict)?;
                    evaluate(&gold_corpus, &pred_corpus, counted, options)
                        .with_context(|| format!("scoring {}", p.display()))
                })
                .collect::<anyhow::Result<Vec<EvalReport>>>()?;
            let text = if let [report] = reports.as_slice() {
                format!("{}\n{}", report.to_table(), report.to_key_values())
            } else {
                let agg = aggregate(&reports)?;
                format!("{}\n{}", agg.to_table(), agg.to_key_values())
            };
            out.main(output.as_deref(), text);
        }
        Command::Render { io } => {
            let corpus = read_corpus(io.input.as_deref(), ctx.strict)?;
            let mut text = String::new();
            for doc in &corpus.documents {
                text.push_str(&format!("# {}\n", doc.id));
                for s in 0..doc.sentences.len() {
                    text.push_str(&doc.sentence_text(s));
                    text.push('\n');
                }
            }
            out.main(io.output.as_deref(), text);
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli).and_then(Outputs::flush) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
