mod common;

use std::collections::HashSet;

use eatseq::depgraph::{DepGraph, Token};
use eatseq::eatcore::extract;
use eatseq::placeholders::{
    mask, unmask, PlaceholderClass, PlaceholderEntry, PlaceholderError, PlaceholderLexicon, PlaceholderMap,
};
use eatseq::vectorizer::EmbeddingStore;

use common::oracles::{placeholder_fixtures as fixtures, placeholder_store as store};

#[test]
fn fixture_corpus_has_every_kind_of_chunk() {
    let graphs = fixtures();
    assert_eq!(graphs.len(), 100);
    let lex = PlaceholderLexicon::default();
    let mut classes = HashSet::new();
    for g in &graphs {
        let (_, map) = mask(g, &store(), &lex, 0).unwrap();
        assert!(!map.is_empty(), "{}", g.text());
        classes.extend(map.entries.iter().map(|e| e.class));
    }
    assert_eq!(classes.len(), 6, "{classes:?}");
}

#[test]
fn mask_then_unmask_restores_every_fixture() {
    let lex = PlaceholderLexicon::default();
    let store = store();
    for seed in 0..5 {
        for g in fixtures() {
            let (masked, map) = mask(&g, &store, &lex, seed).unwrap();
            let back = unmask(&masked.forms(), &map, &lex);
            assert_eq!(back.tokens, g.forms(), "seed {seed}: {}", masked.text());
            assert!(back.unmatched.is_empty());
        }
    }
}

#[test]
fn placeholders_are_distinct_and_foreign_to_the_sentence() {
    let lex = PlaceholderLexicon::default();
    let store = store();
    for seed in 0..20 {
        for g in fixtures() {
            let (_, map) = mask(&g, &store, &lex, seed).unwrap();
            let original: HashSet<String> = g.forms().iter().map(|f| f.to_lowercase()).collect();
            let mut seen = HashSet::new();
            for e in &map.entries {
                assert!(seen.insert(e.placeholder.to_lowercase()));
                for f in lex.forms(&e.placeholder) {
                    assert!(!original.contains(&f.to_lowercase()), "{} reused in {}", f, g.text());
                }
            }
        }
    }
}

#[test]
fn masking_is_seeded() {
    let lex = PlaceholderLexicon::default();
    let g = &fixtures()[0];
    assert_eq!(mask(g, &store(), &lex, 9).unwrap(), mask(g, &store(), &lex, 9).unwrap());
}

#[test]
fn compounds_collapse_to_one_placeholder() {
    let lex = PlaceholderLexicon::default();
    let g = &fixtures()[0];
    assert_eq!(g.text(), "Diego Mensah saw seven frindles .");
    let (masked, map) = mask(g, &store(), &lex, 1).unwrap();
    assert_eq!(masked.len(), 5);
    assert_eq!(map.entries[0].original, "Diego Mensah");
    assert_eq!(map.entries[0].class, PlaceholderClass::Name);
    assert_eq!(map.entries[1].class, PlaceholderClass::Number);
    assert_eq!(map.entries[2].class, PlaceholderClass::Count);
    assert!(lex.digits.contains(&masked.tokens()[2].form));
    // The plural noun placeholder is inflected for number.
    let noun = &masked.tokens()[3];
    assert_eq!(lex.forms(&noun.lemma)[1], noun.form);
    assert!(extract(&masked).is_ok());
}

#[test]
fn oov_verbs_keep_their_inflection_and_transitivity() {
    let lex = PlaceholderLexicon::default();
    let g = &fixtures()[1];
    let (masked, map) = mask(g, &store(), &lex, 3).unwrap();
    let verb = map.entries.iter().find(|e| e.original.ends_with("ed")).unwrap();
    assert_eq!(verb.class, PlaceholderClass::Transitive);
    assert_eq!(masked.tokens()[1].form, lex.forms(&verb.placeholder)[2]);
    let g = &fixtures()[2];
    let (_, map) = mask(g, &store(), &lex, 3).unwrap();
    assert!(map.entries.iter().any(|e| e.class == PlaceholderClass::Intransitive));
    assert!(map.entries.iter().any(|e| e.class == PlaceholderClass::Mass));
    assert!(map.entries.iter().all(|e| e.placeholder != "dog"));
}

#[test]
fn literal_placeholder_names_are_never_reused() {
    let lex = PlaceholderLexicon::default();
    let with_john: Vec<DepGraph> = fixtures().into_iter().filter(|g| g.forms().contains(&"John".to_string())).collect();
    assert!(!with_john.is_empty());
    for seed in 0..50 {
        for g in &with_john {
            let (_, map) = mask(g, &store(), &lex, seed).unwrap();
            assert!(map.entries.iter().all(|e| e.placeholder != "John"));
        }
    }
}

fn sentence(words: &[(&str, &str, &str, usize, &str)]) -> DepGraph {
    let toks = words
        .iter()
        .enumerate()
        .map(|(i, (form, lemma, upos, head, rel))| Token::new(i + 1, *form, *lemma, *upos, *head, *rel))
        .collect();
    DepGraph::new(toks, "t").unwrap()
}

#[test]
fn names_in_a_known_sentence() {
    let g = sentence(&[
        ("Sami", "Sami", "PROPN", 2, "nsubj"),
        ("gave", "give", "VERB", 0, "ROOT"),
        ("away", "away", "ADP", 2, "prt"),
        ("millions", "million", "NOUN", 2, "dobj"),
        ("of", "of", "ADP", 4, "prep"),
        ("dollars", "dollar", "NOUN", 5, "pobj"),
    ]);
    let store = EmbeddingStore::hashed(4, 0, ["give", "away", "million", "of", "dollar"]);
    let lex = PlaceholderLexicon::default();
    let (masked, map) = mask(&g, &store, &lex, 0).unwrap();
    assert_eq!(map.entries.len(), 1);
    assert_eq!(map.entries[0].original, "Sami");
    assert!(lex.names.contains(&map.entries[0].placeholder));
    assert_eq!(masked.tokens()[0].form, map.entries[0].placeholder);
    assert_eq!(masked.forms()[1..], g.forms()[1..]);
    let allowed = map.allowed_placeholders(&lex, &masked.forms());
    assert_eq!(allowed, vec![map.entries[0].placeholder.clone()]);
}

#[test]
fn nothing_to_mask_is_identity() {
    let g = sentence(&[("dogs", "dog", "NOUN", 2, "nsubj"), ("bark", "bark", "VERB", 0, "ROOT")]);
    let store = EmbeddingStore::hashed(4, 0, ["dog", "bark"]);
    let (masked, map) = mask(&g, &store, &PlaceholderLexicon::default(), 0).unwrap();
    assert_eq!(masked, g);
    assert!(map.is_empty());
    let lex = PlaceholderLexicon::default();
    assert_eq!(unmask(&["a", "dog", "barks"], &PlaceholderMap::default(), &lex).tokens, ["a", "dog", "barks"]);
}

#[test]
fn inflected_placeholders_map_back_through_their_lemma() {
    let lex = PlaceholderLexicon::default();
    let map = PlaceholderMap {
        entries: vec![PlaceholderEntry { placeholder: "walk".into(), original: "glorp".into(), class: PlaceholderClass::Intransitive }],
    };
    assert_eq!(unmask(&["he", "walked", "."], &map, &lex).tokens, ["he", "glorp", "."]);
    let stray = unmask(&["Linda", "walks"], &map, &lex);
    assert_eq!(stray.tokens, ["Linda", "glorp"]);
    assert_eq!(stray.unmatched, ["Linda"]);
}

#[test]
fn running_out_of_digits() {
    let mut words = Vec::new();
    for i in 0..9 {
        words.push(("10", "10", "NUM", 1, "dep"));
        if i < 8 {
            words.push(("and", "and", "CCONJ", 1, "cc"));
        }
    }
    words[0] = ("10", "10", "NUM", 0, "ROOT");
    let err = mask(&sentence(&words), &EmbeddingStore::hashed(4, 0, ["and"]), &PlaceholderLexicon::default(), 0);
    assert!(matches!(err, Err(PlaceholderError::PlaceholderExhausted { class: PlaceholderClass::Number })));
}

#[test]
fn lexicon_override_file() {
    let lex = PlaceholderLexicon::default();
    let json = serde_json::to_string(&lex).unwrap();
    assert_eq!(PlaceholderLexicon::from_json(&json).unwrap(), lex);
    let partial = PlaceholderLexicon::from_json(r#"{"names": ["Zed"]}"#).unwrap();
    assert_eq!(partial.names, ["Zed"]);
    assert!(PlaceholderLexicon::from_json(r#"{"inflections": {"walk": ["walked"]}}"#).is_err());
    assert!(PlaceholderLexicon::from_json("[").is_err());
}
