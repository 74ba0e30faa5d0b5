//! Acceptance gate: one line per criterion, non-zero exit if any fails.

use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use corefkit::conll::{parse_corpus_str, serialize_corpus, strip_singletons};
use corefkit::lexicon::{builtin_noun_lexicon, builtin_paradigms};
use corefkit::metrics::{lea, lea_with, pronoun_score, LeaOptions};
use corefkit::model::Document;
use corefkit::transform::{
    anonymize_names, classify_pronoun, delexicalize, pronoun_specific, replace_nouns,
    swap_pronouns, ClassifierConfig, TransformOptions,
};
use corefkit_testkit::{
    fixture, load_fixture, oracle_lea, oracle_pronoun_score, perturbed_prediction, random_corpus,
    random_document, rng, synthetic_corpus, GenConfig,
};

type Check = Result<String, String>;
type DocFn<'a> = Box<dyn Fn(&Document) -> Document + 'a>;
type Criterion = (&'static str, Option<Duration>, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn corefkit(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_corefkit"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

fn fixture_arg(name: &str) -> String {
    fixture(name).display().to_string()
}

fn kitchen_lea() -> Check {
    let gold = load_fixture("kitchen_gold.conll");
    let pred = load_fixture("kitchen_pred.conll");
    let s = lea(&gold.documents[0].clusters, &pred.documents[0].clusters);
    ensure((s.f1 - 6.0 / 7.0).abs() < 1e-9, format!("F1 {}", s.f1))?;
    ensure(
        (s.recall - 0.75).abs() < 1e-12,
        format!("recall {}", s.recall),
    )?;
    ensure(
        (s.precision - 1.0).abs() < 1e-12,
        format!("precision {}", s.precision),
    )?;
    let report = corefkit(&[
        "score",
        "--gold",
        &fixture_arg("kitchen_gold.conll"),
        "--pred",
        &fixture_arg("kitchen_pred.conll"),
    ])?;
    ensure(
        report.contains("lea_f1=0.857143\n"),
        "CLI report lacks F1 0.857143",
    )?;
    Ok(format!("P={} R={} F1={:.9}", s.precision, s.recall, s.f1))
}

fn kitchen_pronouns() -> Check {
    let cfg = ClassifierConfig::default();
    let gold = load_fixture("kitchen_gold.conll");
    let pred = load_fixture("kitchen_pred.conll");
    let r = pronoun_score(&gold.documents[0], &pred.documents[0], |t| {
        classify_pronoun(t, &cfg).is_some()
    })
    .map_err(|e| e.to_string())?;
    ensure(r.score() == Some(50.0), format!("score {:?}", r.score()))?;
    ensure(
        (r.resolved, r.total) == (1, 2),
        format!("{}/{}", r.resolved, r.total),
    )?;
    Ok(format!(
        "{:.2}% ({}/{})",
        r.score().unwrap(),
        r.resolved,
        r.total
    ))
}

fn folkestone_rows() -> Check {
    let rows = [
        (
            "hij",
            "Na zijn herstel vindt hij zijn persoon en zijn ouder terug in Folkestone.",
        ),
        (
            "zij",
            "Na haar herstel vindt zij haar persoon en haar ouder terug in Folkestone.",
        ),
        (
            "hen",
            "Na hun herstel vindt hen hun persoon en hun ouder terug in Folkestone.",
        ),
        (
            "die",
            "Na diens herstel vindt die diens persoon en diens ouder terug in Folkestone.",
        ),
    ];
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (name, expected) in rows {
        let out = dir.path().join(format!("{name}.conll"));
        corefkit(&[
            "transform",
            "--paradigm",
            name,
            "--anonymize",
            "--neutralize-nouns",
            "-o",
            out.to_str().unwrap(),
            &fixture_arg("folkestone.conll"),
        ])?;
        let rendered = corefkit(&["render", out.to_str().unwrap()])?;
        ensure(
            rendered == format!("# folkestone\n{expected}\n"),
            format!("{name}: {rendered:?}"),
        )?;

        let without = corefkit(&[
            "transform",
            "--paradigm",
            name,
            "--neutralize-nouns",
            &fixture_arg("folkestone.conll"),
        ])?;
        let with = fs::read_to_string(&out).map_err(|e| e.to_string())?;
        ensure(
            with == without,
            format!("{name}: anonymisation changed the sentence"),
        )?;
    }
    Ok("hij, zij, hen, die rows match".into())
}

fn football_anonymisation() -> Check {
    let doc = &load_fixture("anonymisation.conll").documents[0];
    let text = anonymize_names(doc).0.text();
    let expected = "ANON_0 ANON_1 is op vrijdag vrij omdat ANON_0 dan voetbalt";
    ensure(text == expected, format!("{text:?}"))?;
    let cli = corefkit(&[
        "transform",
        "--paradigm",
        "baseline",
        "--anonymize",
        &fixture_arg("anonymisation.conll"),
    ])?;
    let (corpus, _) = parse_corpus_str(&cli).map_err(|e| e.to_string())?;
    ensure(corpus.documents[0].text() == expected, "CLI output differs")?;
    Ok(text)
}

fn sizes_and_split() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("synthetic.conll");
    let corpus = synthetic_corpus(625, 625);
    fs::write(
        &input,
        serialize_corpus(&corpus).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let input = input.to_str().unwrap();
    for k in [62usize, 30, 15, 7] {
        let out = dir.path().join(format!("k{k}"));
        corefkit(&[
            "sample",
            "--count",
            &k.to_string(),
            "--partitions",
            "5",
            "--seed",
            "13",
            "--out-dir",
            out.to_str().unwrap(),
            input,
        ])?;
        for i in 1..=5 {
            let ids = fs::read_to_string(out.join(format!("partition_{i}.ids")))
                .map_err(|e| e.to_string())?;
            let n = ids.lines().count();
            ensure(n == k, format!("partition {i} of size {k} has {n} ids"))?;
            ensure(
                ids.lines().all(|id| corpus.get(id).is_some()),
                "unknown id in partition",
            )?;
        }
    }
    let sidecar = dir.path().join("cda.tsv");
    corefkit(&[
        "cda",
        "--seed",
        "0",
        "--assignments",
        sidecar.to_str().unwrap(),
        "-o",
        "/dev/null",
        input,
    ])?;
    let tsv = fs::read_to_string(&sidecar).map_err(|e| e.to_string())?;
    let hen = tsv.lines().filter(|l| l.ends_with("\then")).count();
    let die = tsv.lines().filter(|l| l.ends_with("\tdie")).count();
    ensure((hen, die) == (313, 312), format!("hen {hen}, die {die}"))?;
    Ok("62/30/15/7 x5, hen 313 / die 312".into())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

fn skeleton_and_clusters_match(a: &Document, b: &Document) -> bool {
    a.clusters == b.clusters
        && a.sentences.len() == b.sentences.len()
        && a.sentences.iter().zip(&b.sentences).all(|(x, y)| {
            x.len() == y.len()
                && x.iter().zip(y).all(|(s, t)| {
                    (&s.pos, &s.feats, s.dep_head, &s.ner) == (&t.pos, &t.feats, t.dep_head, &t.ner)
                })
        })
}

fn property_suites() -> Check {
    let gen = GenConfig::default();
    for seed in 0..1000u64 {
        let corpus = random_corpus(&mut rng(seed), 1 + (seed % 3) as usize, &gen);
        let text = serialize_corpus(&corpus).map_err(|e| e.to_string())?;
        let (parsed, _) = parse_corpus_str(&text).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(
            parsed == corpus,
            format!("round trip differs for seed {seed}"),
        )?;
    }

    let cfg = ClassifierConfig::default();
    let lex = builtin_noun_lexicon();
    let counted = |t: &corefkit::Token| classify_pronoun(t, &cfg).is_some();
    for seed in 0..500u64 {
        let gold = random_document(&mut rng(seed), "d", &gen);
        let pred = perturbed_prediction(&mut rng(!seed), &gold);
        for ignore_singletons in [false, true] {
            let s = lea_with(
                &gold.clusters,
                &pred.clusters,
                LeaOptions { ignore_singletons },
            );
            let (p, r, f) = oracle_lea(&gold.clusters, &pred.clusters, ignore_singletons);
            ensure(
                close(s.precision, p) && close(s.recall, r) && close(s.f1, f),
                format!("LEA seed {seed}"),
            )?;
        }

        let got = pronoun_score(&gold, &pred, counted).map_err(|e| e.to_string())?;
        ensure(
            (got.resolved, got.total) == oracle_pronoun_score(&gold, &pred, counted),
            format!("pronoun score seed {seed}"),
        )?;

        let mut outputs = vec![
            delexicalize(&gold, &cfg),
            anonymize_names(&gold).0,
            replace_nouns(&gold, &lex, &cfg),
        ];
        for p in builtin_paradigms() {
            outputs.push(swap_pronouns(&gold, &p, &cfg));
            outputs.push(pronoun_specific(
                &gold,
                Some(&p),
                &cfg,
                &lex,
                TransformOptions::all(),
            ));
        }
        ensure(
            outputs
                .iter()
                .all(|o| skeleton_and_clusters_match(o, &gold)),
            format!("transform changed tokens or clusters, seed {seed}"),
        )?;

        let stripped = strip_singletons(&gold);
        let transforms: Vec<DocFn> = vec![
            Box::new(|d| delexicalize(d, &cfg)),
            Box::new(|d| anonymize_names(d).0),
            Box::new(|d| replace_nouns(d, &lex, &cfg)),
            Box::new(|d| pronoun_specific(d, None, &cfg, &lex, TransformOptions::all())),
        ];
        let swaps = builtin_paradigms();
        for t in &transforms {
            ensure(
                strip_singletons(&t(&gold)) == t(&stripped),
                format!("strip/transform seed {seed}"),
            )?;
        }
        for p in &swaps {
            let swap =
                |d: &Document| pronoun_specific(d, Some(p), &cfg, &lex, TransformOptions::all());
            ensure(
                strip_singletons(&swap(&gold)) == swap(&stripped),
                format!("strip/{} seed {seed}", p.name),
            )?;
        }
    }
    Ok("1000 round trips; 500 each for LEA, pronoun score, transforms, singleton stripping".into())
}

fn pipeline() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let gold = fixture_arg("pipeline.conll");
    let run = |threads: &str, tag: &str| -> Result<String, String> {
        let transformed = dir.path().join(format!("die-{tag}.conll"));
        let predicted = dir.path().join(format!("pred-{tag}.conll"));
        corefkit(&[
            "--threads",
            threads,
            "transform",
            "--paradigm",
            "die",
            "--anonymize",
            "--neutralize-nouns",
            "-o",
            transformed.to_str().unwrap(),
            &gold,
        ])?;
        corefkit(&[
            "--threads",
            threads,
            "resolve-baseline",
            "-o",
            predicted.to_str().unwrap(),
            transformed.to_str().unwrap(),
        ])?;
        corefkit(&[
            "--threads",
            threads,
            "score",
            "--gold",
            &gold,
            "--pred",
            predicted.to_str().unwrap(),
        ])
    };
    let first = run("1", "a")?;
    let second = run("1", "b")?;
    let parallel = run("4", "c")?;
    ensure(first == second, "repeated runs differ")?;
    ensure(first == parallel, "1-thread and 4-thread runs differ")?;
    ensure(first.contains("lea_f1="), "report lacks LEA F1")?;
    let f1 = first.lines().find(|l| l.starts_with("lea_f1=")).unwrap();
    let ps = first
        .lines()
        .find(|l| l.starts_with("pronoun_score="))
        .unwrap();
    Ok(format!("{f1}, {ps}; identical across 3 runs"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        (
            "1. LEA on the kitchen example",
            Some(Duration::from_secs(1)),
            kitchen_lea,
        ),
        (
            "2. pronoun score on the kitchen example",
            Some(Duration::from_secs(1)),
            kitchen_pronouns,
        ),
        (
            "3. Folkestone sentence under four paradigms",
            Some(Duration::from_secs(1)),
            folkestone_rows,
        ),
        (
            "4. name anonymisation example",
            None,
            football_anonymisation,
        ),
        (
            "5. partition sizes and hen/die split on 625 documents",
            Some(Duration::from_secs(5)),
            sizes_and_split,
        ),
        (
            "6. property suites",
            Some(Duration::from_secs(60)),
            property_suites,
        ),
        (
            "7. deterministic transform, resolve, score pipeline",
            None,
            pipeline,
        ),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = match (result, limit) {
            (Ok(_), Some(limit)) if elapsed > limit => {
                Err(format!("took {elapsed:.2?}, limit {limit:?}"))
            }
            (r, _) => r,
        };
        match result {
            Ok(detail) => println!("[PASS] {name}: {detail} ({elapsed:.2?})"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why} ({elapsed:.2?})");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
