mod common;

use std::io::Write;

use eatseq::eatcore::{extract, EatSequence, Role, FEATURE_COUNT};
use eatseq::vectorizer::{
    load_embeddings, parse_embeddings, sequence_to_matrix, tuple_to_vector, vector_len, EmbeddingStore, OovPolicy,
    VectorizerError,
};
use proptest::prelude::*;

use common::strategies::arb_tuple;
use common::*;

#[test]
fn paper_dimension_gives_928() {
    let store = EmbeddingStore::new(300, OovPolicy::Zero);
    let t = tuple(active(), w("see"), w("dog"), w("cat"));
    assert_eq!(tuple_to_vector(&t, &store).len(), 928);
}

#[test]
fn empty_slots_embed_as_zero_blocks() {
    let store = EmbeddingStore::hashed(300, 1, ["brown"]);
    let v = tuple_to_vector(&modifier(Role::Agent, w("brown")), &store);
    // 1-based positions 29..328 and 629..928.
    assert!(v.values[28..328].iter().all(|&x| x == 0.0));
    assert!(v.values[628..928].iter().all(|&x| x == 0.0));
    assert!(v.values[328..628].iter().any(|&x| x != 0.0));
    assert_eq!(store.lookup(None), vec![0.0; 300]);
}

#[test]
fn concatenation_order_event_agent_theme() {
    let store = parse_embeddings("see 1 0 0\ndog 0 1 0\ncat 0 0 1\n").unwrap();
    let v = tuple_to_vector(&tuple(active(), w("see"), w("dog"), w("cat")), &store);
    assert_eq!(&v.values[FEATURE_COUNT..], &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
}

#[test]
fn embedding_file_loading() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "dog 0.5 1.5 -2\ncat 1 2 3\ndog 9 9 9").unwrap();
    let store = load_embeddings(f.path()).unwrap();
    assert_eq!((store.dim(), store.len()), (3, 2));
    assert_eq!(store.lookup(Some("dog")), vec![0.5, 1.5, -2.0]);

    let mut g = tempfile::NamedTempFile::new().unwrap();
    writeln!(g, "a 1 2 3\nb 1 2 3 4").unwrap();
    assert!(matches!(
        load_embeddings(g.path()),
        Err(VectorizerError::InconsistentDimension { line: 2, expected: 3, found: 4 })
    ));
    let empty = tempfile::NamedTempFile::new().unwrap();
    assert!(matches!(load_embeddings(empty.path()), Err(VectorizerError::EmptyFile)));
}

#[test]
fn matrices_preserve_order() {
    let store = EmbeddingStore::hashed(8, 3, ["walk", "dog", "brown"]);
    assert!(sequence_to_matrix(&EatSequence::default(), &store).is_empty());
    let g = gold_graphs().into_iter().find(|g| g.sentence_id() == "g16").unwrap();
    let m = sequence_to_matrix(&extract(&g).unwrap(), &store);
    assert_eq!(m.len(), 2);
    assert!(m[1].block(0, 8).iter().all(|&x| x == 0.0));
    assert_eq!(m[0].block(0, 8), store.lookup(Some("walk")).as_slice());
    assert_eq!(m[1].block(1, 8), store.lookup(Some("brown")).as_slice());
}

proptest! {
    #[test]
    fn feature_block_roundtrips(t in arb_tuple(), dim in 1usize..16) {
        let store = EmbeddingStore::new(dim, OovPolicy::Zero);
        let v = tuple_to_vector(&t, &store);
        prop_assert_eq!(v.len(), vector_len(dim));
        prop_assert!(v.values[..FEATURE_COUNT].iter().all(|&x| x == 0.0 || x == 1.0));
        prop_assert_eq!(v.features(), t.features());
    }

    #[test]
    fn zero_block_means_empty_or_oov(t in arb_tuple()) {
        let store = EmbeddingStore::hashed(6, 9, ["see", "dog"]);
        let mut zero_store = store.clone();
        zero_store.set_oov_policy(OovPolicy::Zero);
        let v = tuple_to_vector(&t, &zero_store);
        for (k, slot) in [&t.event, &t.agent, &t.theme].into_iter().enumerate() {
            let zero = v.block(k, 6).iter().all(|&x| x == 0.0);
            match slot.lemma() {
                None => prop_assert!(zero),
                Some(l) => prop_assert_eq!(zero, !zero_store.contains(l)),
            }
        }
    }
}
