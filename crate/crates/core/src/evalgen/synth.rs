//! A small English grammar that emits sentences together with their
//! dependency parses and gold EAT sequences, plus an analysis-by-synthesis
//! parser for its own output.

use std::collections::{HashMap, HashSet};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::categories::Category;
use super::EvalError;
use crate::decoding::Reparser;
use crate::depgraph::{DepGraph, Token};
use crate::eatcore::{ClauseFeatures, EatSequence, EatTuple, Force, PrepPosition, Role, Voice, WordSlot};
use crate::transform::Tense;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerbEntry {
    pub lemma: String,
    pub third: String,
    pub past: String,
    pub participle: String,
    pub gerund: String,
}

impl VerbEntry {
    pub fn new(lemma: &str, third: &str, past: &str, participle: &str, gerund: &str) -> Self {
        VerbEntry {
            lemma: lemma.into(),
            third: third.into(),
            past: past.into(),
            participle: participle.into(),
            gerund: gerund.into(),
        }
    }

    /// Regular `-s`/`-ed`/`-ing` inflection.
    pub fn regular(lemma: &str) -> Self {
        let stem = lemma.strip_suffix('e').unwrap_or(lemma);
        let third = if lemma.ends_with("ch") || lemma.ends_with("sh") || lemma.ends_with('s') {
            format!("{lemma}es")
        } else {
            format!("{lemma}s")
        };
        let past = if lemma.ends_with('e') { format!("{lemma}d") } else { format!("{lemma}ed") };
        VerbEntry { lemma: lemma.into(), third, participle: past.clone(), past, gerund: format!("{stem}ing") }
    }

    fn forms(&self) -> [&str; 5] {
        [&self.lemma, &self.third, &self.past, &self.participle, &self.gerund]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NounEntry {
    pub singular: String,
    pub plural: String,
}

impl NounEntry {
    pub fn new(singular: &str, plural: &str) -> Self {
        NounEntry { singular: singular.into(), plural: plural.into() }
    }
}

/// Lexicon and sampling rates of the generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GrammarConfig {
    pub verbs: Vec<VerbEntry>,
    pub nouns: Vec<NounEntry>,
    /// Nouns used only as objects of prepositions.
    pub places: Vec<NounEntry>,
    pub names: Vec<String>,
    pub adjectives: Vec<String>,
    pub prepositions: Vec<String>,
    pub p_name: f64,
    pub p_plural: f64,
    pub p_definite: f64,
    pub p_adjective: f64,
    pub p_pp: f64,
}

impl Default for GrammarConfig {
    fn default() -> Self {
        let regular = ["chase", "love", "like", "hate", "call", "follow", "watch", "help"];
        let mut verbs = vec![
            VerbEntry::new("see", "sees", "saw", "seen", "seeing"),
            VerbEntry::new("hear", "hears", "heard", "heard", "hearing"),
            VerbEntry::new("find", "finds", "found", "found", "finding"),
        ];
        verbs.extend(regular.iter().map(|v| VerbEntry::regular(v)));
        let nouns = [
            ("dog", "dogs"),
            ("cat", "cats"),
            ("man", "men"),
            ("woman", "women"),
            ("boy", "boys"),
            ("girl", "girls"),
            ("person", "people"),
            ("bird", "birds"),
            ("horse", "horses"),
            ("teacher", "teachers"),
        ];
        let places = [("park", "parks"), ("house", "houses"), ("garden", "gardens")];
        GrammarConfig {
            verbs,
            nouns: nouns.iter().map(|(s, p)| NounEntry::new(s, p)).collect(),
            places: places.iter().map(|(s, p)| NounEntry::new(s, p)).collect(),
            names: ["John", "Mary", "Lisa", "Peter"].map(String::from).to_vec(),
            adjectives: ["big", "small", "old", "young", "brown"].map(String::from).to_vec(),
            prepositions: ["in", "near", "behind"].map(String::from).to_vec(),
            p_name: 0.15,
            p_plural: 0.3,
            p_definite: 0.5,
            p_adjective: 0.2,
            p_pp: 0.25,
        }
    }
}

const FUNCTION_WORDS: &[&str] = &[
    "a", "the", "by", "not", "do", "does", "did", "is", "are", "was", "were", "be", "been", "being", "has", "have", "had",
    ".", "?",
];

impl GrammarConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |m: String| Err(EvalError::BadTemplate(m));
        if self.verbs.is_empty() || self.nouns.is_empty() {
            return bad("at least one verb and one noun are required".into());
        }
        if !self.prepositions.is_empty() && self.places.is_empty() && self.p_pp > 0.0 {
            return bad("prepositional phrases need at least one place noun".into());
        }
        for (name, p) in [
            ("p_name", self.p_name),
            ("p_plural", self.p_plural),
            ("p_definite", self.p_definite),
            ("p_adjective", self.p_adjective),
            ("p_pp", self.p_pp),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        if self.p_name > 0.0 && self.names.is_empty() {
            return bad("p_name > 0 with no names".into());
        }
        if self.p_adjective > 0.0 && self.adjectives.is_empty() {
            return bad("p_adjective > 0 with no adjectives".into());
        }
        let mut owner: HashMap<String, String> =
            FUNCTION_WORDS.iter().map(|w| (w.to_string(), "function word".to_string())).collect();
        let mut claim = |word: &'_ str, who: String| -> Result<(), EvalError> {
            if word.is_empty() || word.contains(char::is_whitespace) {
                return Err(EvalError::BadTemplate(format!("{who}: {word:?} is not a single token")));
            }
            match owner.get(word) {
                Some(prev) if *prev != who => {
                    Err(EvalError::BadTemplate(format!("{word:?} is used both as {prev} and {who}")))
                }
                _ => {
                    owner.insert(word.to_string(), who);
                    Ok(())
                }
            }
        };
        for v in &self.verbs {
            for f in v.forms() {
                claim(f, format!("verb {}", v.lemma))?;
            }
        }
        for n in self.nouns.iter().chain(&self.places) {
            claim(&n.singular, format!("noun {}", n.singular))?;
            claim(&n.plural, format!("noun {}", n.singular))?;
        }
        for (list, kind) in [(&self.names, "name"), (&self.adjectives, "adjective"), (&self.prepositions, "preposition")] {
            for w in list {
                claim(w, format!("{kind} {w}"))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum NounPhrase {
    Name(String),
    Common { noun: NounEntry, plural: bool, definite: bool, adjective: Option<String> },
}

impl NounPhrase {
    fn is_plural(&self) -> bool {
        matches!(self, NounPhrase::Common { plural: true, .. })
    }

    fn slot(&self) -> WordSlot {
        match self {
            NounPhrase::Name(n) => WordSlot::word(n.clone()).definite(),
            NounPhrase::Common { noun, plural, definite, .. } => {
                let mut s = WordSlot::word(noun.singular.clone());
                s.plural = *plural;
                s.definite = *definite;
                s
            }
        }
    }
}

/// Everything the realiser needs for one sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub force: Force,
    pub truth: bool,
    pub voice: Voice,
    pub tense: Tense,
    pub imperfective: bool,
    pub verb: VerbEntry,
    pub agent: NounPhrase,
    pub theme: NounPhrase,
    pub pp: Option<(String, NounPhrase)>,
}

impl Plan {
    pub fn clause(&self) -> ClauseFeatures {
        let (present, past, perfect) = match self.tense {
            Tense::Present => (true, false, false),
            Tense::Past => (false, true, false),
            Tense::Perfect => (true, false, true),
            Tense::Pluperfect => (false, true, true),
            Tense::Infinitive => (false, false, false),
        };
        ClauseFeatures {
            force: self.force,
            truth: self.truth,
            voice: self.voice,
            present,
            past,
            perfect,
            imperfective: self.imperfective,
            prep_position: PrepPosition::None,
        }
    }

    /// Classes this plan belongs to, one per dimension.
    pub fn categories(&self) -> Vec<Category> {
        Category::ALL.into_iter().filter(|c| c.holds(&self.clause())).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthExample {
    pub tokens: Vec<String>,
    pub graph: DepGraph,
    pub gold: EatSequence,
    /// The class this example was drawn to represent.
    pub class: Category,
    pub plan: Plan,
}

const VERB: usize = usize::MAX;

struct Builder {
    toks: Vec<Token>,
    /// Gold tuples other than the main one, keyed by token position.
    extras: Vec<(usize, EatTuple)>,
}

impl Builder {
    #[allow(clippy::too_many_arguments)]
    fn push(&mut self, form: &str, lemma: &str, upos: &str, xpos: &str, feats: &str, head: usize, rel: &str) -> usize {
        let idx = self.toks.len() + 1;
        let t = Token::new(idx, form, lemma, upos, head, rel).with_xpos(xpos).with_feats(feats);
        self.toks.push(t);
        idx
    }

    /// Emits a noun phrase whose head hangs off `head` with `rel`; returns the
    /// head's index. Adjectives become modifier tuples in `role`.
    fn noun_phrase(&mut self, np: &NounPhrase, head: usize, rel: &str, role: Role) -> usize {
        match np {
            NounPhrase::Name(n) => self.push(n, n, "PROPN", "NNP", "Number=Sing", head, rel),
            NounPhrase::Common { noun, plural, definite, adjective } => {
                let first = self.toks.len() + 1;
                let det_len = usize::from(*definite || !*plural);
                let adj_len = usize::from(adjective.is_some());
                let noun_idx = first + det_len + adj_len;
                if *definite {
                    self.push("the", "the", "DET", "DT", "Definite=Def|PronType=Art", noun_idx, "det");
                } else if !*plural {
                    self.push("a", "a", "DET", "DT", "Definite=Ind|PronType=Art", noun_idx, "det");
                }
                if let Some(a) = adjective {
                    let ai = self.push(a, a, "ADJ", "JJ", "Degree=Pos", noun_idx, "amod");
                    let mut t = EatTuple::new(ClauseFeatures::non_verbal(), WordSlot::empty(), WordSlot::empty(), WordSlot::empty());
                    *t.slot_mut(role) = WordSlot::word(a.clone());
                    self.extras.push((ai, t));
                }
                let (form, xpos, feats) =
                    if *plural { (&noun.plural, "NNS", "Number=Plur") } else { (&noun.singular, "NN", "Number=Sing") };
                self.push(form, &noun.singular, "NOUN", xpos, feats, head, rel)
            }
        }
    }
}

struct Aux {
    form: &'static str,
    lemma: &'static str,
    xpos: &'static str,
    feats: &'static str,
    rel: &'static str,
}

const PRES: &str = "Mood=Ind|Tense=Pres|VerbForm=Fin";
const PAST: &str = "Mood=Ind|Tense=Past|VerbForm=Fin";

fn finite(lemma: &'static str, past: bool, plural: bool, rel: &'static str) -> Aux {
    let (form, xpos) = match (lemma, past, plural) {
        ("do", false, false) => ("does", "VBZ"),
        ("do", false, true) => ("do", "VBP"),
        ("do", true, _) => ("did", "VBD"),
        ("have", false, false) => ("has", "VBZ"),
        ("have", false, true) => ("have", "VBP"),
        ("have", true, _) => ("had", "VBD"),
        ("be", false, false) => ("is", "VBZ"),
        ("be", false, true) => ("are", "VBP"),
        ("be", true, false) => ("was", "VBD"),
        _ => ("were", "VBD"),
    };
    Aux { form, lemma, xpos, feats: if past { PAST } else { PRES }, rel }
}

const BEEN_AUX: Aux = Aux { form: "been", lemma: "be", xpos: "VBN", feats: "Tense=Past|VerbForm=Part", rel: "aux" };
const BEEN_PASS: Aux = Aux { form: "been", lemma: "be", xpos: "VBN", feats: "Tense=Past|VerbForm=Part", rel: "auxpass" };
const BEING_PASS: Aux = Aux { form: "being", lemma: "be", xpos: "VBG", feats: "VerbForm=Ger", rel: "auxpass" };

enum VerbForm {
    Base,
    Finite,
    Participle,
    Gerund,
}

/// Auxiliary chain and main-verb form for a plan.
fn verb_group(plan: &Plan, plural: bool) -> (Vec<Aux>, VerbForm) {
    let past = matches!(plan.tense, Tense::Past | Tense::Pluperfect);
    let perfect = matches!(plan.tense, Tense::Perfect | Tense::Pluperfect);
    match (plan.voice, perfect, plan.imperfective) {
        (Voice::Passive, false, false) => (vec![finite("be", past, plural, "auxpass")], VerbForm::Participle),
        (Voice::Passive, false, true) => (vec![finite("be", past, plural, "aux"), BEING_PASS], VerbForm::Participle),
        (Voice::Passive, true, false) => (vec![finite("have", past, plural, "aux"), BEEN_PASS], VerbForm::Participle),
        (Voice::Passive, true, true) => {
            (vec![finite("have", past, plural, "aux"), BEEN_AUX, BEING_PASS], VerbForm::Participle)
        }
        (_, false, false) if plan.truth && plan.force == Force::Declarative => (Vec::new(), VerbForm::Finite),
        (_, false, false) => (vec![finite("do", past, plural, "aux")], VerbForm::Base),
        (_, false, true) => (vec![finite("be", past, plural, "aux")], VerbForm::Gerund),
        (_, true, false) => (vec![finite("have", past, plural, "aux")], VerbForm::Participle),
        (_, true, true) => (vec![finite("have", past, plural, "aux"), BEEN_AUX], VerbForm::Gerund),
    }
}

/// Surface tokens, parse and gold EAT for a plan.
pub fn realize(plan: &Plan, sentence_id: &str) -> Result<(Vec<String>, DepGraph, EatSequence), EvalError> {
    let (subject, subject_rel) = match plan.voice {
        Voice::Passive => (&plan.theme, "nsubjpass"),
        _ => (&plan.agent, "nsubj"),
    };
    let subject_role = if plan.voice == Voice::Passive { Role::Theme } else { Role::Agent };
    let (chain, form) = verb_group(plan, subject.is_plural());
    let mut b = Builder { toks: Vec::new(), extras: Vec::new() };
    let push_aux = |b: &mut Builder, a: &Aux| b.push(a.form, a.lemma, "AUX", a.xpos, a.feats, VERB, a.rel);
    let mut rest = chain.iter();
    if plan.force == Force::Question {
        if let Some(first) = rest.next() {
            push_aux(&mut b, first);
        }
        b.noun_phrase(subject, VERB, subject_rel, subject_role);
        if !plan.truth {
            b.push("not", "not", "PART", "RB", "Polarity=Neg", VERB, "neg");
        }
    } else {
        b.noun_phrase(subject, VERB, subject_rel, subject_role);
        if let Some(first) = rest.next() {
            push_aux(&mut b, first);
        }
        if !plan.truth {
            b.push("not", "not", "PART", "RB", "Polarity=Neg", VERB, "neg");
        }
    }
    for a in rest {
        push_aux(&mut b, a);
    }
    let v = &plan.verb;
    let past = matches!(plan.tense, Tense::Past | Tense::Pluperfect);
    let (vform, xpos, feats) = match form {
        VerbForm::Base => (&v.lemma, "VB", "VerbForm=Inf"),
        VerbForm::Finite if past => (&v.past, "VBD", PAST),
        VerbForm::Finite if subject.is_plural() => (&v.lemma, "VBP", PRES),
        VerbForm::Finite => (&v.third, "VBZ", PRES),
        VerbForm::Participle => (&v.participle, "VBN", "Tense=Past|VerbForm=Part"),
        VerbForm::Gerund => (&v.gerund, "VBG", "VerbForm=Ger"),
    };
    let verb_idx = b.push(vform, &v.lemma, "VERB", xpos, feats, 0, "ROOT");
    if plan.voice == Voice::Passive {
        let by = b.push("by", "by", "ADP", "IN", "_", verb_idx, "agent");
        b.noun_phrase(&plan.agent, by, "pobj", Role::Agent);
    } else {
        b.noun_phrase(&plan.theme, verb_idx, "dobj", Role::Theme);
    }
    if let Some((prep, obj)) = &plan.pp {
        let p = b.push(prep, prep, "ADP", "IN", "_", verb_idx, "prep");
        let before = b.extras.len();
        b.noun_phrase(obj, p, "pobj", Role::Theme);
        let t = EatTuple::new(
            ClauseFeatures::preposition(PrepPosition::Event),
            WordSlot::word(prep.clone()),
            WordSlot::empty(),
            obj.slot(),
        );
        b.extras.insert(before, (p, t));
    }
    let punct = if plan.force == Force::Question { "?" } else { "." };
    b.push(punct, punct, "PUNCT", ".", "_", verb_idx, "punct");
    for t in &mut b.toks {
        if t.head == VERB {
            t.head = verb_idx;
        }
    }
    let tokens = b.toks.iter().map(|t| t.form.clone()).collect();
    let graph = DepGraph::new(b.toks, sentence_id).map_err(|e| EvalError::BadTemplate(e.to_string()))?;
    let main = EatTuple::new(plan.clause(), WordSlot::word(v.lemma.clone()), plan.agent.slot(), plan.theme.slot());
    b.extras.sort_by_key(|(pos, _)| *pos);
    let mut tuples = vec![main];
    tuples.extend(b.extras.into_iter().map(|(_, t)| t));
    Ok((tokens, graph, EatSequence::new(sentence_id, tuples)))
}

/// The generator and its parser.
#[derive(Debug, Clone)]
pub struct SynthGrammar {
    config: GrammarConfig,
    verb_forms: HashMap<String, usize>,
    nouns: HashMap<String, (NounEntry, bool)>,
    names: HashSet<String>,
    adjectives: HashSet<String>,
    prepositions: HashSet<String>,
}

impl SynthGrammar {
    pub fn new(config: GrammarConfig) -> Result<Self, EvalError> {
        config.validate()?;
        let mut verb_forms = HashMap::new();
        for (i, v) in config.verbs.iter().enumerate() {
            for f in v.forms() {
                verb_forms.insert(f.to_string(), i);
            }
        }
        let mut nouns = HashMap::new();
        for n in config.nouns.iter().chain(&config.places) {
            nouns.insert(n.singular.clone(), (n.clone(), false));
            nouns.insert(n.plural.clone(), (n.clone(), true));
        }
        Ok(SynthGrammar {
            verb_forms,
            nouns,
            names: config.names.iter().cloned().collect(),
            adjectives: config.adjectives.iter().cloned().collect(),
            prepositions: config.prepositions.iter().cloned().collect(),
            config,
        })
    }

    pub fn config(&self) -> &GrammarConfig {
        &self.config
    }

    fn noun_phrase(&self, rng: &mut ChaCha8Rng, pool: &[NounEntry], allow_name: bool) -> NounPhrase {
        if allow_name && rng.random_bool(self.config.p_name) {
            return NounPhrase::Name(self.config.names.choose(rng).expect("validated").clone());
        }
        let noun = pool.choose(rng).expect("validated").clone();
        let plural = rng.random_bool(self.config.p_plural);
        let definite = rng.random_bool(self.config.p_definite);
        let adjective =
            rng.random_bool(self.config.p_adjective).then(|| self.config.adjectives.choose(rng).expect("validated").clone());
        NounPhrase::Common { noun, plural, definite, adjective }
    }

    /// A random plan in which the dimension of `class` takes that class's value.
    pub fn random_plan(&self, class: Category, rng: &mut ChaCha8Rng) -> Plan {
        let mut plan = Plan {
            force: if rng.random_bool(0.5) { Force::Question } else { Force::Declarative },
            truth: rng.random_bool(0.5),
            voice: if rng.random_bool(0.5) { Voice::Passive } else { Voice::Active },
            tense: *[Tense::Present, Tense::Past, Tense::Perfect, Tense::Pluperfect].choose(rng).expect("non-empty"),
            imperfective: rng.random_bool(0.5),
            verb: self.config.verbs.choose(rng).expect("validated").clone(),
            agent: self.noun_phrase(rng, &self.config.nouns, true),
            theme: self.noun_phrase(rng, &self.config.nouns, true),
            pp: None,
        };
        if !self.config.prepositions.is_empty() && rng.random_bool(self.config.p_pp) {
            let prep = self.config.prepositions.choose(rng).expect("non-empty").clone();
            plan.pp = Some((prep, self.noun_phrase(rng, &self.config.places, false)));
        }
        match class {
            Category::Declarative => plan.force = Force::Declarative,
            Category::Question => plan.force = Force::Question,
            Category::Affirmed => plan.truth = true,
            Category::Negated => plan.truth = false,
            Category::Active => plan.voice = Voice::Active,
            Category::Passive => plan.voice = Voice::Passive,
            Category::Present => plan.tense = Tense::Present,
            Category::Past => plan.tense = Tense::Past,
            Category::Perfect => plan.tense = Tense::Perfect,
            Category::Pluperfect => plan.tense = Tense::Pluperfect,
            Category::Perfective => plan.imperfective = false,
            Category::Imperfective => plan.imperfective = true,
        }
        plan
    }

    /// `n` examples; example `i` represents class `i mod 12`.
    pub fn corpus(&self, n: usize, seed: u64) -> Result<Vec<SynthExample>, EvalError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let class = Category::ALL[i % Category::ALL.len()];
                let plan = self.random_plan(class, &mut rng);
                let (tokens, graph, gold) = realize(&plan, &format!("synth-{i}"))?;
                Ok(SynthExample { tokens, graph, gold, class, plan })
            })
            .collect()
    }

    /// Reads a noun phrase starting at `i`; returns it and the next position.
    fn read_np(&self, toks: &[String], i: usize) -> Option<(NounPhrase, usize)> {
        let t = toks.get(i)?;
        if self.names.contains(t) {
            return Some((NounPhrase::Name(t.clone()), i + 1));
        }
        let mut j = i;
        let det = toks.get(j).filter(|w| *w == "a" || *w == "the").cloned();
        if det.is_some() {
            j += 1;
        }
        let adjective = toks.get(j).filter(|w| self.adjectives.contains(*w)).cloned();
        if adjective.is_some() {
            j += 1;
        }
        let (noun, plural) = self.nouns.get(toks.get(j)?)?.clone();
        let definite = det.as_deref() == Some("the");
        Some((NounPhrase::Common { noun, plural, definite, adjective }, j + 1))
    }

    /// Recovers the plan behind a token sequence this grammar can produce.
    pub fn parse_plan(&self, toks: &[String]) -> Option<Plan> {
        let force = match toks.last()?.as_str() {
            "." => Force::Declarative,
            "?" => Force::Question,
            _ => return None,
        };
        let verb_positions: Vec<usize> = (0..toks.len()).filter(|&i| self.verb_forms.contains_key(&toks[i])).collect();
        let &[vpos] = verb_positions.as_slice() else { return None };
        let verb = self.config.verbs[self.verb_forms[&toks[vpos]]].clone();
        let subject_start = (0..vpos).find(|&i| self.read_np(toks, i).is_some())?;
        let (subject, _) = self.read_np(toks, subject_start)?;
        let mut i = vpos + 1;
        let (voice, other) = if toks.get(i).map(String::as_str) == Some("by") {
            let (np, next) = self.read_np(toks, i + 1)?;
            i = next;
            (Voice::Passive, np)
        } else {
            let (np, next) = self.read_np(toks, i)?;
            i = next;
            (Voice::Active, np)
        };
        let pp = match toks.get(i) {
            Some(p) if self.prepositions.contains(p) => {
                let (np, _) = self.read_np(toks, i + 1)?;
                Some((p.clone(), np))
            }
            _ => None,
        };
        let (agent, theme) = if voice == Voice::Passive { (other, subject) } else { (subject, other) };
        let base =
            Plan { force, truth: true, voice, tense: Tense::Present, imperfective: false, verb, agent, theme, pp };
        for truth in [true, false] {
            for tense in [Tense::Present, Tense::Past, Tense::Perfect, Tense::Pluperfect] {
                for imperfective in [false, true] {
                    let plan = Plan { truth, tense, imperfective, ..base.clone() };
                    if realize(&plan, "").map(|(t, _, _)| t == toks).unwrap_or(false) {
                        return Some(plan);
                    }
                }
            }
        }
        None
    }

    /// Parse of a token sequence, if this grammar generates it.
    pub fn parse(&self, toks: &[String]) -> Option<DepGraph> {
        let plan = self.parse_plan(toks)?;
        realize(&plan, "reparse").ok().map(|(_, g, _)| g)
    }

    /// Whether a word belongs to the grammar's lexicon or function words.
    pub fn knows(&self, word: &str) -> bool {
        FUNCTION_WORDS.contains(&word)
            || self.verb_forms.contains_key(word)
            || self.nouns.contains_key(word)
            || self.names.contains(word)
            || self.adjectives.contains(word)
            || self.prepositions.contains(word)
    }

    /// Every surface form of a lemma known to the lexicon.
    pub fn surface_forms(&self, lemma: &str) -> Vec<String> {
        if let Some(v) = self.config.verbs.iter().find(|v| v.lemma == lemma) {
            return v.forms().iter().map(|s| s.to_string()).collect();
        }
        if let Some((n, _)) = self.nouns.get(lemma) {
            return vec![n.singular.clone(), n.plural.clone()];
        }
        vec![lemma.to_string()]
    }

    /// Every surface token the grammar can emit, in a fixed order.
    pub fn vocabulary(&self) -> Vec<String> {
        let c = &self.config;
        let mut out: Vec<String> = FUNCTION_WORDS.iter().map(|w| w.to_string()).collect();
        for v in &c.verbs {
            out.extend(v.forms().iter().map(|f| f.to_string()));
        }
        for n in c.nouns.iter().chain(&c.places) {
            out.push(n.singular.clone());
            out.push(n.plural.clone());
        }
        out.extend(c.names.iter().chain(&c.adjectives).chain(&c.prepositions).cloned());
        let mut seen = HashSet::new();
        out.retain(|w| seen.insert(w.clone()));
        out
    }

    /// All distinct lemmas the generator can put into an EAT slot.
    pub fn lemmas(&self) -> Vec<String> {
        let c = &self.config;
        let mut out: Vec<String> = c.verbs.iter().map(|v| v.lemma.clone()).collect();
        out.extend(c.nouns.iter().chain(&c.places).map(|n| n.singular.clone()));
        out.extend(c.names.iter().chain(&c.adjectives).chain(&c.prepositions).cloned());
        out
    }
}

impl Reparser for SynthGrammar {
    fn reparse(&self, tokens: &[String]) -> Option<DepGraph> {
        self.parse(tokens)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eatcore::extract;

    #[test]
    fn regular_inflection() {
        let v = VerbEntry::regular("chase");
        assert_eq!(v.forms(), ["chase", "chases", "chased", "chased", "chasing"]);
        assert_eq!(VerbEntry::regular("watch").third, "watches");
    }

    #[test]
    fn a_passive_perfect_question() {
        let g = SynthGrammar::new(GrammarConfig::default()).unwrap();
        let plan = Plan {
            force: Force::Question,
            truth: false,
            voice: Voice::Passive,
            tense: Tense::Perfect,
            imperfective: false,
            verb: VerbEntry::new("see", "sees", "saw", "seen", "seeing"),
            agent: NounPhrase::Name("Mary".into()),
            theme: NounPhrase::Common {
                noun: NounEntry::new("dog", "dogs"),
                plural: true,
                definite: true,
                adjective: Some("brown".into()),
            },
            pp: None,
        };
        let (toks, graph, gold) = realize(&plan, "x").unwrap();
        assert_eq!(toks.join(" "), "have the brown dogs not been seen by Mary ?");
        assert_eq!(extract(&graph).unwrap(), gold);
        assert_eq!(g.parse_plan(&toks), Some(plan));
    }
}
