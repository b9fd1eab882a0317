//! Random single-tuple EATs for free text generation.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eatcore::{ClauseFeatures, EatSequence, EatTuple, Voice, WordSlot};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenLexicon {
    pub verbs: Vec<String>,
    pub nouns: Vec<String>,
}

impl Default for GenLexicon {
    fn default() -> Self {
        GenLexicon {
            verbs: ["see", "hear", "chase", "love", "like", "hate", "call"].map(String::from).to_vec(),
            nouns: ["dog", "cat", "man", "woman", "boy", "girl", "person"].map(String::from).to_vec(),
        }
    }
}

/// Affirmed, past, active declarative.
pub fn default_generation_clause() -> ClauseFeatures {
    ClauseFeatures { truth: true, past: true, voice: Voice::Active, ..ClauseFeatures::default() }
}

/// One tuple with a uniformly drawn verb, agent and theme.
///
/// # Panics
/// If either word list is empty.
pub fn generate_random_eat(lexicon: &GenLexicon, clause: ClauseFeatures, seed: u64) -> EatSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let verb = lexicon.verbs.choose(&mut rng).expect("lexicon has verbs");
    let agent = lexicon.nouns.choose(&mut rng).expect("lexicon has nouns");
    let theme = lexicon.nouns.choose(&mut rng).expect("lexicon has nouns");
    let t = EatTuple::new(clause, WordSlot::word(verb.clone()), WordSlot::word(agent.clone()), WordSlot::word(theme.clone()));
    EatSequence::new(format!("gen-{seed}"), vec![t])
}
