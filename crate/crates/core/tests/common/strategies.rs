//! proptest strategies over EAT structures.

use eatseq::eatcore::{ClauseFeatures, EatSequence, EatTuple, Force, PrepPosition, Role, Voice, WordSlot};
use eatseq::transform::{Tense, TransformSpec};
use proptest::prelude::*;

pub fn arb_slot(role: Role) -> impl Strategy<Value = WordSlot> {
    (proptest::option::of("[a-z]{1,8}"), any::<[bool; 3]>(), 0u8..3, 0u8..3).prop_map(move |(lemma, f, rp, cmp)| {
        let Some(lemma) = lemma else { return WordSlot::empty() };
        let nominal = role != Role::Event;
        WordSlot {
            lemma: Some(lemma),
            possessive: nominal && f[0],
            plural: nominal && f[1],
            definite: nominal && f[2],
            rp_agent: nominal && rp == 1,
            rp_theme: nominal && rp == 2,
            comparative: cmp == 1,
            superlative: cmp == 2,
        }
    })
}

pub fn arb_clause(verbal: bool) -> impl Strategy<Value = ClauseFeatures> {
    (0u8..3, any::<bool>(), any::<bool>(), 0usize..5, any::<bool>(), 0u8..4).prop_map(
        move |(force, truth, passive, tense, imperfective, prep)| {
            let mut c = ClauseFeatures {
                force: [Force::Declarative, Force::Question, Force::Imperative][force as usize],
                truth,
                voice: if passive { Voice::Passive } else { Voice::Active },
                imperfective,
                ..Default::default()
            };
            let t = Tense::ALL[tense];
            c.present = matches!(t, Tense::Present | Tense::Perfect);
            c.past = matches!(t, Tense::Past | Tense::Pluperfect);
            c.perfect = matches!(t, Tense::Perfect | Tense::Pluperfect);
            if !verbal {
                c = ClauseFeatures::preposition(
                    [PrepPosition::None, PrepPosition::Event, PrepPosition::Agent, PrepPosition::Theme][prep as usize],
                );
            }
            c
        },
    )
}

/// Any tuple satisfying the tuple-level invariants.
pub fn arb_tuple() -> impl Strategy<Value = EatTuple> {
    (any::<bool>(), arb_clause(true), arb_clause(false), arb_slot(Role::Event), arb_slot(Role::Agent), arb_slot(Role::Theme))
        .prop_filter_map("tuple invariants", |(verbal, cv, cn, e, a, t)| {
            let tuple = EatTuple::new(if verbal { cv } else { cn }, e, a, t);
            tuple.validate().ok().map(|_| tuple)
        })
}

fn plain(slot: WordSlot) -> WordSlot {
    WordSlot { rp_agent: false, rp_theme: false, ..slot }
}

/// Valid sequences whose first tuple has a non-empty Agent and Theme.
pub fn arb_sequence() -> impl Strategy<Value = EatSequence> {
    (
        arb_clause(true),
        "[a-z]{1,8}",
        arb_slot(Role::Agent),
        arb_slot(Role::Theme),
        proptest::collection::vec(arb_tuple(), 0..5),
    )
        .prop_filter_map("sequence invariants", |(c, ev, ag, th, rest)| {
            if ag.is_empty() || th.is_empty() {
                return None;
            }
            let mut tuples = vec![EatTuple::new(c, WordSlot::word(ev), plain(ag), plain(th))];
            tuples.extend(rest);
            let seq = EatSequence::new("p", tuples);
            seq.validate().ok().map(|_| seq)
        })
}

pub fn arb_spec() -> impl Strategy<Value = TransformSpec> {
    (
        proptest::option::of(0u8..3),
        proptest::option::of(any::<bool>()),
        proptest::option::of(any::<bool>()),
        proptest::option::of(0usize..5),
        proptest::option::of(any::<bool>()),
    )
        .prop_map(|(force, truth, passive, tense, imperfective)| TransformSpec {
            force: force.map(|f| [Force::Declarative, Force::Question, Force::Imperative][f as usize]),
            truth,
            voice: passive.map(|p| if p { Voice::Passive } else { Voice::Active }),
            tense: tense.map(|t| Tense::ALL[t]),
            imperfective,
            lexical_edits: Vec::new(),
        })
}
