use std::collections::BTreeSet;

use proptest::prelude::*;
use vnner_core::corpus::{
    bio_violations, read_conll, repair_tags, spans_from_bio, tags_from_spans, to_conll_string, words_to_syllables,
};
use vnner_core::eval::score_sentences;
use vnner_core::features::{extract, shape, shaped};
use vnner_core::synthetic::smoke_lexicons;
use vnner_core::{Corpus, FeatureConfig, Layout, Sentence, Tag, Token};

const SYLLABLE: &str = "[a-zA-ZàáạảãâầấậẩẫăằắặẳẵđĐèéêềếệìíòóôồốộơờớợùúưừứựýỳ0-9.,/;%-]{1,6}";

fn surface() -> impl Strategy<Value = String> {
    prop::collection::vec(SYLLABLE, 1..=3).prop_map(|s| s.join("_"))
}

fn tag() -> impl Strategy<Value = Tag> {
    let ty = prop::sample::select(vec!["PER", "LOC", "ORG", "MISC"]);
    prop_oneof![
        Just(Tag::Outside),
        ty.clone().prop_map(|t| Tag::Begin(t.to_owned())),
        ty.prop_map(|t| Tag::Inside(t.to_owned())),
    ]
}

fn tags(max: usize) -> impl Strategy<Value = Vec<Tag>> {
    prop::collection::vec(tag(), 1..=max)
}

/// A sentence with valid BIO labels and pos/chunk columns.
fn sentence() -> impl Strategy<Value = Sentence> {
    prop::collection::vec((surface(), tag(), "[A-Z]{1,2}", "[BI]-[NV]P"), 1..=12).prop_map(|rows| {
        let labels = repair_tags(&rows.iter().map(|r| r.1.clone()).collect::<Vec<_>>());
        let tokens = rows
            .into_iter()
            .zip(labels)
            .map(|((s, _, pos, chunk), t)| Token::labeled(s, t).unwrap().with_pos(pos).with_chunk(chunk))
            .collect();
        Sentence::new(tokens).unwrap()
    })
}

fn layout() -> Layout {
    "surface,pos,chunk,label".parse().unwrap()
}

fn collapse(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if !out.ends_with(c) {
            out.push(c);
        }
    }
    out
}

proptest! {
    #[test]
    fn conll_round_trip(sentences in prop::collection::vec(sentence(), 1..6)) {
        let corpus = Corpus::new(layout(), sentences);
        let text = to_conll_string(&corpus);
        let back = read_conll(text.as_bytes(), &layout()).unwrap();
        prop_assert_eq!(&back, &corpus);
        prop_assert_eq!(to_conll_string(&back), text);
    }

    #[test]
    fn repair_is_idempotent_and_valid(t in tags(15)) {
        let once = repair_tags(&t);
        prop_assert!(bio_violations(&once).is_empty());
        prop_assert_eq!(repair_tags(&once), once.clone());
        if bio_violations(&t).is_empty() {
            prop_assert_eq!(once, t);
        }
    }

    #[test]
    fn spans_rebuild_the_sequence(t in tags(15)) {
        let valid = repair_tags(&t);
        let spans = spans_from_bio(&valid).unwrap();
        prop_assert_eq!(tags_from_spans(valid.len(), &spans), valid);
    }

    #[test]
    fn syllables_preserve_spans(s in sentence()) {
        let out = words_to_syllables(&s).unwrap();
        let before = spans_from_bio(&s.labels().unwrap()).unwrap();
        let after = spans_from_bio(&out.labels().unwrap()).unwrap();
        prop_assert_eq!(before.len(), after.len());
        let words: Vec<&str> = s.surfaces().collect();
        let syllables: Vec<&str> = out.surfaces().collect();
        for (a, b) in before.iter().zip(&after) {
            prop_assert_eq!(&a.entity_type, &b.entity_type);
            let joined = words[a.start..=a.end].join("_");
            let split = syllables[b.start..=b.end].join("_");
            prop_assert_eq!(joined, split);
        }
        prop_assert_eq!(out.len(), words.iter().map(|w| w.split('_').count()).sum::<usize>());
    }

    #[test]
    fn shaped_is_collapsed_shape(s in "\\PC{1,12}") {
        prop_assert_eq!(shaped(&s), collapse(&shape(&s)));
    }

    #[test]
    fn extraction_is_deterministic(s in sentence()) {
        let lex = smoke_lexicons(1, 4);
        let cfg = FeatureConfig::all();
        prop_assert_eq!(extract(&s, &cfg, &lex).unwrap(), extract(&s, &cfg, &lex).unwrap());
    }

    #[test]
    fn enabling_a_family_keeps_other_keys(s in sentence(), which in 0usize..5) {
        let lex = smoke_lexicons(1, 4);
        let base = FeatureConfig { word: true, ..FeatureConfig::none() };
        let mut more = base.clone();
        match which {
            0 => more.word_shapes = true,
            1 => more.pos = true,
            2 => more.chunk = true,
            3 => more.cluster = true,
            _ => more.embeddings = true,
        }
        let a = extract(&s, &base, &lex).unwrap();
        let b = extract(&s, &more, &lex).unwrap();
        for (p, q) in a.positions.iter().zip(&b.positions) {
            let bigger: BTreeSet<&String> = q.binary.iter().collect();
            prop_assert!(p.binary.iter().all(|k| bigger.contains(k)));
            prop_assert!(p.numeric.iter().all(|k| q.numeric.contains(k)));
        }
    }

    #[test]
    fn windowed_key_counts_do_not_depend_on_position(s in sentence(), radius in 0usize..4) {
        let cfg = FeatureConfig { word: true, word_shapes: true, pos: true, chunk: true, window_radius: radius, ..FeatureConfig::none() };
        let feats = extract(&s, &cfg, &vnner_core::Lexicons::none()).unwrap();
        let count = |keys: &[String], family: &str| {
            let prefix = format!("{family}[");
            keys.iter().filter(|k| k.starts_with(&prefix)).count()
        };
        for family in ["w", "lw", "shape", "shaped", "type", "fregex", "pos", "chunk"] {
            let counts: BTreeSet<usize> = feats.positions.iter().map(|p| count(&p.binary, family)).collect();
            prop_assert_eq!(counts.len(), 1, "family {}", family);
        }
    }

    #[test]
    fn swapping_gold_and_prediction_swaps_precision_and_recall(g in sentence(), t in tags(12)) {
        let mut labels = repair_tags(&t);
        labels.resize(g.len(), Tag::Outside);
        let p = g.with_labels(labels);
        let ab = score_sentences(std::slice::from_ref(&g), std::slice::from_ref(&p)).unwrap();
        let ba = score_sentences(&[p], &[g]).unwrap();
        prop_assert_eq!(ab.precision(), ba.recall());
        prop_assert_eq!(ab.recall(), ba.precision());
        let sum = ab.per_type.values().fold((0, 0, 0), |acc, c| (acc.0 + c.gold, acc.1 + c.predicted, acc.2 + c.correct));
        prop_assert_eq!(sum, (ab.overall.gold, ab.overall.predicted, ab.overall.correct));
    }

    #[test]
    fn self_score_is_perfect(sentences in prop::collection::vec(sentence(), 1..6)) {
        let r = score_sentences(&sentences, &sentences).unwrap();
        if r.overall.gold > 0 {
            prop_assert_eq!(format!("{:.2}", r.f1()), "100.00");
        }
    }
}
