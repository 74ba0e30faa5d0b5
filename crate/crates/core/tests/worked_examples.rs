use corefkit::conll::serialize_corpus;
use corefkit::lexicon::{builtin_noun_lexicon, paradigm};
use corefkit::metrics::{
    evaluate, lea, lea_with, pronoun_score, Averaging, EvalOptions, LeaOptions,
};
use corefkit::transform::{
    anonymize_names, classify_pronoun, pronoun_specific, ClassifierConfig, TransformOptions,
};
use corefkit_testkit::{load_fixture, read_fixture};

fn third_singular(cfg: &ClassifierConfig) -> impl Fn(&corefkit::Token) -> bool + Sync + '_ {
    move |t| classify_pronoun(t, cfg).is_some()
}

#[test]
fn fixtures_are_in_canonical_form() {
    for name in [
        "kitchen_gold.conll",
        "kitchen_pred.conll",
        "folkestone.conll",
        "anonymisation.conll",
        "pipeline.conll",
    ] {
        let corpus = load_fixture(name);
        assert_eq!(
            serialize_corpus(&corpus).unwrap(),
            read_fixture(name),
            "{name}"
        );
    }
}

#[test]
fn kitchen_example_lea() {
    let gold = load_fixture("kitchen_gold.conll");
    let pred = load_fixture("kitchen_pred.conll");
    let s = lea(&gold.documents[0].clusters, &pred.documents[0].clusters);
    assert!((s.f1 - 6.0 / 7.0).abs() < 1e-9);
    assert!((s.recall - 0.75).abs() < 1e-12);
    assert!((s.precision - 1.0).abs() < 1e-12);

    let s = lea_with(
        &gold.documents[0].clusters,
        &pred.documents[0].clusters,
        LeaOptions {
            ignore_singletons: true,
        },
    );
    assert!((s.f1 - 5.0 / 6.0).abs() < 1e-9);
}

#[test]
fn kitchen_example_pronoun_score() {
    let cfg = ClassifierConfig::default();
    let gold = load_fixture("kitchen_gold.conll");
    let pred = load_fixture("kitchen_pred.conll");
    let r = pronoun_score(&gold.documents[0], &pred.documents[0], third_singular(&cfg)).unwrap();
    assert_eq!((r.resolved, r.total), (1, 2));
    assert_eq!(r.score(), Some(50.0));
    assert_eq!(r.per_form["they"], (0, 1));
    assert_eq!(r.per_form["their"], (1, 1));

    let report = evaluate(&gold, &pred, third_singular(&cfg), EvalOptions::default()).unwrap();
    assert_eq!(report.pronoun_score, Some(50.0));
    assert!(report.to_key_values().contains("lea_f1=0.857143\n"));
    assert!(report.to_key_values().contains("pronoun_score=50.00\n"));

    let macro_opts = EvalOptions {
        averaging: Averaging::Macro,
        ..EvalOptions::default()
    };
    let report = evaluate(&gold, &pred, third_singular(&cfg), macro_opts).unwrap();
    assert_eq!(report.pronoun_score, Some(50.0));
}

#[test]
fn folkestone_rows() {
    let cfg = ClassifierConfig::default();
    let lex = builtin_noun_lexicon();
    let doc = &load_fixture("folkestone.conll").documents[0];
    assert_eq!(
        doc.text(),
        "Na zijn herstel vindt hij zijn vrouw en zijn moeder terug in Folkestone."
    );
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
    for (name, expected) in rows {
        let p = paradigm(name).unwrap();
        let out = pronoun_specific(doc, Some(&p), &cfg, &lex, TransformOptions::all());
        assert_eq!(out.text(), expected, "{name}");
        assert_eq!(out.clusters, doc.clusters);
        // Anonymisation has nothing to do: the only name is a location.
        let without_anon = pronoun_specific(
            doc,
            Some(&p),
            &cfg,
            &lex,
            TransformOptions {
                anonymize: false,
                neutralize_nouns: true,
            },
        );
        assert_eq!(without_anon, out);
    }
}

#[test]
fn football_anonymisation() {
    let doc = &load_fixture("anonymisation.conll").documents[0];
    let (out, map) = anonymize_names(doc);
    assert_eq!(
        out.text(),
        "ANON_0 ANON_1 is op vrijdag vrij omdat ANON_0 dan voetbalt"
    );
    assert_eq!(map.names(), ["Jan".to_owned(), "Jansen".to_owned()]);
}
