//! Masking of names, numbers and out-of-vocabulary words with in-vocabulary
//! stand-ins, and their restoration after decoding.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::depgraph::{DepGraph, DepGraphError, Token};
use crate::vectorizer::EmbeddingStore;

#[derive(Debug, Error)]
pub enum PlaceholderError {
    #[error("no free {class} placeholder left")]
    PlaceholderExhausted { class: PlaceholderClass },
    #[error("invalid placeholder lexicon: {0}")]
    BadLexicon(String),
    #[error(transparent)]
    Graph(#[from] DepGraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaceholderClass {
    Name,
    Number,
    Intransitive,
    Transitive,
    Count,
    Mass,
}

impl fmt::Display for PlaceholderClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlaceholderClass::Name => "name",
            PlaceholderClass::Number => "number",
            PlaceholderClass::Intransitive => "intransitive",
            PlaceholderClass::Transitive => "transitive",
            PlaceholderClass::Count => "count",
            PlaceholderClass::Mass => "mass",
        })
    }
}

/// Placeholder words per class and the surface forms of each.
///
/// Verb forms are listed as base, third person singular, past, past
/// participle, present participle; noun forms as singular, plural.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlaceholderLexicon {
    pub names: Vec<String>,
    pub digits: Vec<String>,
    pub intransitive: Vec<String>,
    pub transitive: Vec<String>,
    pub count: Vec<String>,
    pub mass: Vec<String>,
    pub inflections: BTreeMap<String, Vec<String>>,
}

impl Default for PlaceholderLexicon {
    fn default() -> Self {
        let words = |ws: &[&str]| ws.iter().map(|w| w.to_string()).collect::<Vec<_>>();
        let table: &[&[&str]] = &[
            &["walk", "walks", "walked", "walked", "walking"],
            &["sing", "sings", "sang", "sung", "singing"],
            &["eat", "eats", "ate", "eaten", "eating"],
            &["drink", "drinks", "drank", "drunk", "drinking"],
            &["sit", "sits", "sat", "sat", "sitting"],
            &["make", "makes", "made", "made", "making"],
            &["do", "does", "did", "done", "doing"],
            &["prepare", "prepares", "prepared", "prepared", "preparing"],
            &["write", "writes", "wrote", "written", "writing"],
            &["woman", "women"],
            &["man", "men"],
            &["girl", "girls"],
            &["boy", "boys"],
            &["dog", "dogs"],
            &["stuff"],
            &["water", "waters"],
            &["air", "airs"],
            &["fire", "fires"],
            &["food", "foods"],
        ];
        PlaceholderLexicon {
            names: words(&[
                "John", "Mary", "Bob", "Alice", "Lisa", "Tom", "Harry", "Anna", "James", "Jennifer", "Richard", "Charles",
                "Thomas", "George", "Linda",
            ]),
            digits: (2..=9).map(|d| d.to_string()).collect(),
            intransitive: words(&["walk", "sing", "eat", "drink", "sit"]),
            transitive: words(&["make", "do", "prepare", "sing", "write"]),
            count: words(&["woman", "man", "girl", "boy", "dog"]),
            mass: words(&["stuff", "water", "air", "fire", "food"]),
            inflections: table.iter().map(|f| (f[0].to_string(), words(f))).collect(),
        }
    }
}

impl PlaceholderLexicon {
    pub fn from_json(text: &str) -> Result<Self, PlaceholderError> {
        let lex: PlaceholderLexicon =
            serde_json::from_str(text).map_err(|e| PlaceholderError::BadLexicon(e.to_string()))?;
        lex.validate()?;
        Ok(lex)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PlaceholderError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), PlaceholderError> {
        for (lemma, forms) in &self.inflections {
            if forms.first() != Some(lemma) {
                return Err(PlaceholderError::BadLexicon(format!("forms of {lemma:?} must start with the lemma")));
            }
        }
        let mut owner: HashMap<String, &str> = HashMap::new();
        for (lemma, forms) in &self.inflections {
            for f in forms {
                if let Some(prev) = owner.insert(f.to_lowercase(), lemma) {
                    if prev != lemma {
                        return Err(PlaceholderError::BadLexicon(format!("{f:?} inflects both {prev:?} and {lemma:?}")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn list(&self, class: PlaceholderClass) -> &[String] {
        match class {
            PlaceholderClass::Name => &self.names,
            PlaceholderClass::Number => &self.digits,
            PlaceholderClass::Intransitive => &self.intransitive,
            PlaceholderClass::Transitive => &self.transitive,
            PlaceholderClass::Count => &self.count,
            PlaceholderClass::Mass => &self.mass,
        }
    }

    /// Every surface form of a placeholder, the lemma first.
    pub fn forms(&self, lemma: &str) -> Vec<String> {
        self.inflections.get(lemma).cloned().unwrap_or_else(|| vec![lemma.to_string()])
    }

    /// The placeholder a surface form inflects, if any.
    pub fn lemma_of(&self, form: &str) -> Option<String> {
        let lower = form.to_lowercase();
        for (lemma, forms) in &self.inflections {
            if forms.iter().any(|f| f.to_lowercase() == lower) {
                return Some(lemma.clone());
            }
        }
        self.names.iter().chain(&self.digits).chain(self.all_class_words()).find(|w| w.to_lowercase() == lower).cloned()
    }

    fn all_class_words(&self) -> impl Iterator<Item = &String> {
        self.intransitive.iter().chain(&self.transitive).chain(&self.count).chain(&self.mass)
    }

    /// Drops placeholders with a surface form `known` rejects, such as words
    /// a decoder cannot produce.
    pub fn retain_known(&mut self, known: impl Fn(&str) -> bool) {
        let keep = |w: &String, inflections: &BTreeMap<String, Vec<String>>| {
            inflections.get(w).map_or_else(|| known(w), |fs| fs.iter().all(|f| known(f)))
        };
        for list in [
            &mut self.names,
            &mut self.digits,
            &mut self.intransitive,
            &mut self.transitive,
            &mut self.count,
            &mut self.mass,
        ] {
            list.retain(|w| keep(w, &self.inflections));
        }
    }

    /// Name and number placeholders, the ones the decoder must not invent.
    pub fn name_and_number_words(&self) -> Vec<String> {
        self.names.iter().chain(&self.digits).cloned().collect()
    }

    /// Form of `lemma` matching the morphology of `original`.
    fn inflect(&self, lemma: &str, class: PlaceholderClass, original: &Token) -> String {
        let forms = self.forms(lemma);
        let pick = |i: usize| forms.get(i).cloned().unwrap_or_else(|| lemma.to_string());
        match class {
            PlaceholderClass::Intransitive | PlaceholderClass::Transitive => match original.xpos.as_deref() {
                Some("VBZ") => pick(1),
                Some("VBD") => pick(2),
                Some("VBN") => pick(3),
                Some("VBG") => pick(4),
                _ if original.has_feat("VerbForm", "Ger") => pick(4),
                _ if original.has_feat("VerbForm", "Part") && original.has_feat("Tense", "Pres") => pick(4),
                _ if original.has_feat("VerbForm", "Part") => pick(3),
                _ if original.has_feat("Tense", "Past") => pick(2),
                _ if original.has_feat("Person", "3") && original.has_feat("Number", "Sing") => pick(1),
                _ => pick(0),
            },
            PlaceholderClass::Count | PlaceholderClass::Mass => {
                if original.has_feat("Number", "Plur") || matches!(original.xpos.as_deref(), Some("NNS" | "NNPS")) {
                    pick(1)
                } else {
                    pick(0)
                }
            }
            _ => lemma.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceholderEntry {
    pub placeholder: String,
    pub original: String,
    pub class: PlaceholderClass,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceholderMap {
    pub entries: Vec<PlaceholderEntry>,
}

impl PlaceholderMap {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, placeholder: &str) -> Option<&PlaceholderEntry> {
        self.entries.iter().find(|e| e.placeholder.to_lowercase() == placeholder.to_lowercase())
    }

    /// Name and number placeholders the decoder may emit: those used for
    /// masking plus any that already occur in the masked sentence.
    pub fn allowed_placeholders<S: AsRef<str>>(&self, lexicon: &PlaceholderLexicon, masked_tokens: &[S]) -> Vec<String> {
        let present: HashSet<String> = masked_tokens.iter().map(|t| t.as_ref().to_lowercase()).collect();
        lexicon
            .name_and_number_words()
            .into_iter()
            .filter(|w| present.contains(&w.to_lowercase()) || self.get(w).is_some())
            .collect()
    }
}

const CLOSED_CLASSES: &[&str] = &["DET", "ADP", "PRON", "AUX", "CCONJ", "SCONJ", "PART", "PUNCT", "SYM", "INTJ", "X"];
const SINGULAR_NUMBERS: &[&str] = &["1", "one", "a", "an"];

fn is_name(t: &Token) -> bool {
    t.is_proper_noun()
}

fn is_number(t: &Token) -> bool {
    t.upos == "NUM" || t.xpos.as_deref() == Some("CD")
}

/// A run of adjacent tokens masked as one unit; `head` is its only token
/// attached outside the run.
struct Chunk {
    start: usize,
    end: usize,
    head: usize,
    class: PlaceholderClass,
}

fn runs(graph: &DepGraph, pred: impl Fn(&Token) -> bool, class: PlaceholderClass, out: &mut Vec<Chunk>) {
    let toks = graph.tokens();
    let mut i = 0;
    while i < toks.len() {
        if !pred(&toks[i]) {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < toks.len() && pred(&toks[j + 1]) {
            j += 1;
        }
        let (start, end) = (toks[i].index, toks[j].index);
        let outside: Vec<usize> =
            (i..=j).filter(|&k| toks[k].head < start || toks[k].head > end).map(|k| toks[k].index).collect();
        if let [head] = outside[..] {
            out.push(Chunk { start, end, head, class });
        } else {
            out.extend((i..=j).map(|k| Chunk { start: toks[k].index, end: toks[k].index, head: toks[k].index, class }));
        }
        i = j + 1;
    }
}

fn oov_class(graph: &DepGraph, t: &Token) -> PlaceholderClass {
    match t.upos.as_str() {
        "VERB" => {
            let has_object = graph
                .children(t.index, None)
                .map(|cs| cs.iter().any(|c| matches!(c.relation(), "dobj" | "iobj" | "dative")))
                .unwrap_or(false);
            if has_object {
                PlaceholderClass::Transitive
            } else {
                PlaceholderClass::Intransitive
            }
        }
        "NOUN" => PlaceholderClass::Count,
        _ => PlaceholderClass::Mass,
    }
}

fn chunks(graph: &DepGraph, store: &EmbeddingStore) -> Vec<Chunk> {
    let mut out = Vec::new();
    runs(graph, is_name, PlaceholderClass::Name, &mut out);
    let plural_number = |t: &Token| is_number(t) && !SINGULAR_NUMBERS.contains(&t.form.to_lowercase().as_str());
    runs(graph, plural_number, PlaceholderClass::Number, &mut out);
    for t in graph.tokens() {
        let taken = out.iter().any(|c| (c.start..=c.end).contains(&t.index));
        if taken || is_name(t) || is_number(t) || t.is_punct() || CLOSED_CLASSES.contains(&t.upos.as_str()) {
            continue;
        }
        if !store.contains(&t.lemma) && !store.contains(&t.form) {
            out.push(Chunk { start: t.index, end: t.index, head: t.index, class: oov_class(graph, t) });
        }
    }
    out.sort_by_key(|c| c.start);
    out
}

/// Replaces maskable chunks with placeholders that occur nowhere else in the
/// sentence. Multi-token chunks collapse to their head token.
pub fn mask(
    graph: &DepGraph,
    store: &EmbeddingStore,
    lexicon: &PlaceholderLexicon,
    seed: u64,
) -> Result<(DepGraph, PlaceholderMap), PlaceholderError> {
    let found = chunks(graph, store);
    if found.is_empty() {
        return Ok((graph.clone(), PlaceholderMap::default()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let present: HashSet<String> = graph.tokens().iter().map(|t| t.form.to_lowercase()).collect();
    let mut used: HashSet<String> = HashSet::new();
    let mut map = PlaceholderMap::default();
    let mut replacement: HashMap<usize, (String, String)> = HashMap::new();
    let mut dropped: HashMap<usize, usize> = HashMap::new();
    for c in &found {
        let free: Vec<&String> = lexicon
            .list(c.class)
            .iter()
            .filter(|p| !used.contains(&p.to_lowercase()))
            .filter(|p| lexicon.forms(p).iter().all(|f| !present.contains(&f.to_lowercase())))
            .collect();
        let lemma = (*free.choose(&mut rng).ok_or(PlaceholderError::PlaceholderExhausted { class: c.class })?).clone();
        used.insert(lemma.to_lowercase());
        let head = graph.token(c.head)?;
        let surface = (c.start..=c.end).map(|i| graph.token(i).map(|t| t.form.as_str())).collect::<Result<Vec<_>, _>>()?;
        map.entries.push(PlaceholderEntry { placeholder: lemma.clone(), original: surface.join(" "), class: c.class });
        replacement.insert(c.head, (lexicon.inflect(&lemma, c.class, head), lemma));
        for i in c.start..=c.end {
            if i != c.head {
                dropped.insert(i, c.head);
            }
        }
    }
    let kept: Vec<&Token> = graph.tokens().iter().filter(|t| !dropped.contains_key(&t.index)).collect();
    let new_index: HashMap<usize, usize> = kept.iter().enumerate().map(|(i, t)| (t.index, i + 1)).collect();
    let remap = |mut h: usize| {
        while let Some(&to) = dropped.get(&h) {
            h = to;
        }
        if h == 0 {
            0
        } else {
            new_index[&h]
        }
    };
    let tokens = kept
        .iter()
        .map(|t| {
            let mut n = (*t).clone();
            n.index = new_index[&t.index];
            n.head = remap(t.head);
            if let Some((form, lemma)) = replacement.get(&t.index) {
                n.form = form.clone();
                n.lemma = lemma.clone();
            }
            n
        })
        .collect();
    Ok((DepGraph::new(tokens, graph.sentence_id())?, map))
}

/// Result of [`unmask`]: restored tokens and name/number placeholders that
/// had no mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unmasked {
    pub tokens: Vec<String>,
    pub unmatched: Vec<String>,
}

/// Puts the original chunks back in place of mapped placeholders, going
/// through the inflection table for inflected forms.
pub fn unmask<S: AsRef<str>>(decoded: &[S], map: &PlaceholderMap, lexicon: &PlaceholderLexicon) -> Unmasked {
    let specials: HashSet<String> = lexicon.name_and_number_words().iter().map(|w| w.to_lowercase()).collect();
    let mut out = Unmasked { tokens: Vec::new(), unmatched: Vec::new() };
    for tok in decoded {
        let tok = tok.as_ref();
        let entry = lexicon.lemma_of(tok).and_then(|l| map.get(&l)).or_else(|| map.get(tok));
        match entry {
            Some(e) => out.tokens.extend(e.original.split_whitespace().map(String::from)),
            None => {
                if specials.contains(&tok.to_lowercase()) {
                    log::warn!("placeholder {tok:?} has no mapping");
                    out.unmatched.push(tok.to_string());
                }
                out.tokens.push(tok.to_string());
            }
        }
    }
    out
}
