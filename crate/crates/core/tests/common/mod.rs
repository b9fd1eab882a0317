//! Shared fixtures for the integration suites.
#![allow(dead_code)]

pub mod memo;
pub mod oracles;
pub mod strategies;

use eatseq::depgraph::{parse_conllu, DepGraph};
use eatseq::eatcore::{ClauseFeatures, EatSequence, EatTuple, PrepPosition, Role, Voice, WordSlot};

pub const GOLD_CONLLU: &str = include_str!("../fixtures/gold.conllu");

pub fn gold_graphs() -> Vec<DepGraph> {
    parse_conllu(GOLD_CONLLU).expect("gold fixtures parse")
}

pub fn active() -> ClauseFeatures {
    ClauseFeatures { truth: true, voice: Voice::Active, present: true, ..Default::default() }
}

pub fn passive() -> ClauseFeatures {
    ClauseFeatures { voice: Voice::Passive, ..active() }
}

pub fn w(lemma: &str) -> WordSlot {
    WordSlot::word(lemma)
}

pub fn def(lemma: &str) -> WordSlot {
    WordSlot::word(lemma).definite()
}

pub fn none() -> WordSlot {
    WordSlot::empty()
}

pub fn tuple(c: ClauseFeatures, e: WordSlot, a: WordSlot, t: WordSlot) -> EatTuple {
    EatTuple::new(c, e, a, t)
}

pub fn modifier(role: Role, slot: WordSlot) -> EatTuple {
    let mut t = EatTuple::new(ClauseFeatures::non_verbal(), none(), none(), none());
    *t.slot_mut(role) = slot;
    t
}

pub fn prep(pos: PrepPosition, lemma: &str, object: WordSlot) -> EatTuple {
    EatTuple::new(ClauseFeatures::preposition(pos), w(lemma), none(), object)
}

fn rp(mut slot: WordSlot, agent_antecedent: bool) -> WordSlot {
    if agent_antecedent {
        slot.rp_agent = true;
    } else {
        slot.rp_theme = true;
    }
    slot
}

/// Hand-derived EAT sequences for every sentence in `gold.conllu`.
pub fn gold_sequences() -> Vec<(&'static str, Vec<EatTuple>)> {
    use PrepPosition as P;
    use Role::*;
    let past_passive = ClauseFeatures { present: false, past: true, ..passive() };
    vec![
        ("g01", vec![tuple(active(), w("make"), def("Mary"), w("sandwich"))]),
        ("g02", vec![tuple(active(), w("run"), def("Mary"), none()), prep(P::Event, "with", def("John"))]),
        ("g03", vec![tuple(active(), w("sing"), def("Mary"), w("song")), prep(P::Event, "to", def("John"))]),
        ("g04", vec![tuple(active(), w("sing"), def("Mary"), w("song")), prep(P::Event, "to", def("John"))]),
        ("g05", vec![tuple(passive(), w("sing"), none(), w("song")), prep(P::Event, "to", def("John"))]),
        ("g06", vec![tuple(passive(), w("sing"), none(), w("song"))]),
        ("g07", vec![tuple(passive(), w("eat"), def("Mary"), w("sandwich"))]),
        (
            "g08",
            vec![tuple(active(), w("see"), def("John"), none()), tuple(active(), w("walk"), def("Mary"), none())],
        ),
        (
            "g09",
            vec![
                tuple(active(), w("run"), w("man"), none()),
                prep(P::Agent, "in", w("suit")),
                prep(P::Event, "on", def("roof")),
            ],
        ),
        (
            "g10",
            vec![tuple(active(), w("run"), def("dog"), none()), modifier(Agent, def("Mary").possessive())],
        ),
        (
            "g11",
            vec![
                tuple(active(), w("run"), w("dog").plural(), none()),
                modifier(Agent, w("three")),
                modifier(Agent, w("brown")),
                modifier(Event, w("fast")),
            ],
        ),
        (
            "g12",
            vec![
                tuple(active(), w("run"), w("eater"), none()),
                modifier(Agent, w("ant")),
                modifier(Event, w("can")),
                modifier(Event, w("very")),
                modifier(Event, w("fast")),
            ],
        ),
        ("g13", vec![tuple(active(), w("see"), w("dog"), w("cat"))]),
        ("g14", vec![tuple(active(), w("walk"), w("dog"), none())]),
        ("g15", vec![tuple(past_passive, w("see"), none(), w("cat"))]),
        ("g16", vec![tuple(active(), w("walk"), w("dog"), none()), modifier(Agent, w("brown"))]),
        (
            "g17",
            vec![tuple(active(), w("walk"), def("dog"), none()), modifier(Agent, def("Mary").possessive())],
        ),
        (
            "g18",
            vec![
                tuple(active(), w("see"), w("dog"), w("cat")),
                prep(P::Agent, "in", w("house")),
                prep(P::Theme, "on", w("roof")),
            ],
        ),
        (
            "g19",
            vec![
                tuple(active(), w("see"), def("John"), def("Mary")),
                tuple(active(), w("like"), rp(w("who"), true), def("Lisa")),
            ],
        ),
        (
            "g20",
            vec![
                tuple(active(), w("see"), def("John"), def("Mary")),
                tuple(active(), w("like"), rp(w("who"), false), def("Lisa")),
            ],
        ),
        (
            "g21",
            vec![
                tuple(active(), w("see"), def("John"), def("Mary")),
                tuple(active(), w("like"), def("Lisa"), rp(w("who"), true)),
            ],
        ),
        (
            "g22",
            vec![
                tuple(active(), w("see"), def("John"), def("Mary")),
                tuple(active(), w("like"), def("Lisa"), rp(w("who"), false)),
            ],
        ),
        (
            "g23",
            vec![tuple(active(), w("run"), def("John"), none()), tuple(active(), w("see"), def("Mary"), w("which"))],
        ),
    ]
}

pub fn gold_pairs() -> Vec<(DepGraph, EatSequence)> {
    let graphs = gold_graphs();
    gold_sequences()
        .into_iter()
        .map(|(id, tuples)| {
            let g = graphs.iter().find(|g| g.sentence_id() == id).expect("fixture present").clone();
            (g, EatSequence::new(id, tuples))
        })
        .collect()
}
