//! Dependency graph to EAT sequence.

use std::collections::HashSet;

use crate::depgraph::{DepGraph, Token};

use super::features::{clause_features, is_modal, is_negator, is_predicate};
use super::{Anchors, ClauseFeatures, EatError, EatSequence, EatTuple, Role, WordSlot};

#[derive(Debug, Clone, Default)]
pub struct ExtractOptions {
    /// Reject sentences producing more tuples than this.
    pub max_tuples: Option<usize>,
}

const DEFINITE_DETERMINERS: &[&str] = &["the", "this", "that", "these", "those"];
const RELATIVE_PRONOUNS: &[&str] = &["who", "whom", "which", "that", "whose"];
const PLAIN_MODIFIERS: &[&str] = &[
    "amod", "nummod", "compound", "advmod", "npadvmod", "quantmod", "prt", "appos", "acomp", "attr", "oprd", "tmod",
    "nounmod", "flat", "predet", "meta",
];
const CLAUSAL: &[&str] = &["acl", "ccomp", "xcomp", "advcl", "parataxis", "csubj", "csubjpass", "pcomp"];

pub fn extract(graph: &DepGraph) -> Result<EatSequence, EatError> {
    extract_with(graph, &ExtractOptions::default())
}

pub fn extract_with(graph: &DepGraph, opts: &ExtractOptions) -> Result<EatSequence, EatError> {
    let root = graph.root();
    if !is_predicate(graph, root) {
        return Err(EatError::NoMainVerb(graph.sentence_id().to_string()));
    }
    let mut ex = Extractor { graph, items: Vec::new(), seen: HashSet::new() };
    ex.seen.insert(root.index);
    ex.clause(root, None, true);
    ex.items.sort_by_key(|(key, _)| *key);

    let mut tuples: Vec<EatTuple> = ex.items.into_iter().map(|(_, t)| t).collect();
    for i in 1..tuples.len() {
        let prev = tuples[i - 1].event.lemma.clone();
        let cur = &mut tuples[i];
        if cur.event.lemma.is_some() && cur.event.lemma == prev {
            cur.event = WordSlot::empty();
            cur.clause = ClauseFeatures::non_verbal();
            cur.anchors.event = None;
        }
    }
    tuples.retain(|t| !t.is_all_empty());
    if tuples.is_empty() {
        return Err(EatError::EmptySequence);
    }
    if let Some(max) = opts.max_tuples {
        if tuples.len() > max {
            return Err(EatError::TooLong { len: tuples.len(), max });
        }
    }
    let seq = EatSequence::new(graph.sentence_id(), tuples);
    seq.validate()?;
    Ok(seq)
}

type Key = (usize, usize);

struct Extractor<'g> {
    graph: &'g DepGraph,
    items: Vec<(Key, EatTuple)>,
    seen: HashSet<usize>,
}

fn is_nominal(t: &Token) -> bool {
    matches!(t.upos.as_str(), "NOUN" | "PROPN" | "PRON" | "NUM") || t.is_proper_noun()
}

fn comparison(slot: &mut WordSlot, t: &Token) {
    match t.feat("Degree") {
        Some("Cmp") => slot.comparative = true,
        Some("Sup") => slot.superlative = true,
        _ => match t.xpos.as_deref() {
            Some("JJR" | "RBR") => slot.comparative = true,
            Some("JJS" | "RBS") => slot.superlative = true,
            _ => {}
        },
    }
}

impl<'g> Extractor<'g> {
    fn children(&self, index: usize) -> Vec<&'g Token> {
        self.graph.children(index, None).unwrap_or_default()
    }

    fn is_definite(&self, t: &Token) -> bool {
        if t.is_proper_noun() {
            return true;
        }
        self.children(t.index).iter().any(|c| match c.relation() {
            "det" => DEFINITE_DETERMINERS.contains(&c.lemma.to_lowercase().as_str()) || c.has_feat("PronType", "Dem"),
            "poss" => true,
            _ => false,
        })
    }

    /// Slot for a word standing in `role`. Event slots keep only comparison.
    fn slot_for(&self, t: &Token, role: Role) -> WordSlot {
        let mut slot = WordSlot::word(t.lemma.clone());
        comparison(&mut slot, t);
        if role != Role::Event && is_nominal(t) {
            slot.plural = t.has_feat("Number", "Plur") || matches!(t.xpos.as_deref(), Some("NNS" | "NNPS"));
            slot.definite = self.is_definite(t);
        }
        slot
    }

    fn push(&mut self, key: Key, tuple: EatTuple) {
        self.items.push((key, tuple));
    }

    /// Noun governed by a preposition token (`prep` style) or the token itself
    /// when the case marker hangs below the noun (`obl`/`nmod` style).
    fn prep_object(&self, prep: &Token) -> Option<&'g Token> {
        self.children(prep.index).into_iter().find(|c| c.relation() == "pobj")
    }

    fn case_marker(&self, noun: &Token) -> Option<&'g Token> {
        self.children(noun.index).into_iter().find(|c| c.relation() == "case" && c.upos == "ADP")
    }

    fn clause(&mut self, v: &'g Token, antecedent: Option<Role>, main: bool) {
        let key_pos = if main { 0 } else { v.index };
        let children = self.children(v.index);
        let clause = clause_features(self.graph, v);
        let mut used: HashSet<usize> = HashSet::new();

        let cop = children.iter().copied().find(|c| c.relation() == "cop");
        let copular_theme = cop.filter(|_| !v.is_verb() && !v.is_aux());
        let (event_lemma, event_anchor) = match copular_theme {
            Some(c) => {
                used.insert(c.index);
                (c.lemma.clone(), c.index)
            }
            None => (v.lemma.clone(), v.index),
        };

        let find = |rels: &[&str]| children.iter().copied().find(|c| rels.contains(&c.relation()));
        let subject = find(&["nsubj"]);
        let passive_subject = find(&["nsubjpass"]);
        let dobj = find(&["dobj"]);
        let by_phrase = find(&["agent"]);

        let agent_tok = match subject {
            Some(s) => Some(s),
            None => by_phrase.and_then(|a| {
                used.insert(a.index);
                if a.upos == "ADP" || self.prep_object(a).is_some() {
                    self.prep_object(a)
                } else {
                    Some(a)
                }
            }),
        };
        let mut recipients: Vec<(Option<&'g Token>, &'g Token)> = Vec::new();
        let theme_tok = if let Some(d) = dobj {
            if let Some(p) = passive_subject {
                recipients.push((None, p));
            }
            Some(d)
        } else if let Some(p) = passive_subject {
            Some(p)
        } else if copular_theme.is_some() {
            None
        } else {
            find(&["attr", "acomp", "oprd"])
        };
        for c in &children {
            match c.relation() {
                "iobj" => recipients.push((None, c)),
                "prep" if c.lemma.eq_ignore_ascii_case("to") => {
                    if let Some(obj) = self.prep_object(c) {
                        recipients.push((Some(c), obj));
                    }
                }
                "obl" | "nmod" => {
                    if let Some(case) = self.case_marker(c).filter(|k| k.lemma.eq_ignore_ascii_case("to")) {
                        recipients.push((Some(case), c));
                    }
                }
                _ => {}
            }
        }
        recipients.sort_by_key(|(_, n)| n.index);

        // R1/R3 mark an Agent antecedent, R2/R4 a Theme one; an Event
        // antecedent leaves the pronoun unflagged.
        let rp_flags = |slot: &mut WordSlot, t: &Token| {
            let is_rp = t.has_feat("PronType", "Rel") || RELATIVE_PRONOUNS.contains(&t.lemma.to_lowercase().as_str());
            match antecedent {
                Some(Role::Agent) if is_rp => slot.rp_agent = true,
                Some(Role::Theme) if is_rp => slot.rp_theme = true,
                _ => {}
            }
        };

        let mut tuple = EatTuple::new(clause, WordSlot::word(event_lemma), WordSlot::empty(), WordSlot::empty());
        tuple.anchors.event = Some(event_anchor);
        if !main {
            tuple.anchors.attached_to = Some(v.head);
        }
        if let Some(a) = agent_tok {
            used.insert(a.index);
            let mut slot = self.slot_for(a, Role::Agent);
            rp_flags(&mut slot, a);
            tuple.agent = slot;
            tuple.anchors.agent = Some(a.index);
        }
        if let Some(t) = theme_tok {
            used.insert(t.index);
            let mut slot = self.slot_for(t, Role::Theme);
            rp_flags(&mut slot, t);
            tuple.theme = slot;
            tuple.anchors.theme = Some(t.index);
        } else if copular_theme.is_some() {
            tuple.theme = self.slot_for(v, Role::Theme);
            tuple.anchors.theme = Some(v.index);
        }
        self.push((key_pos, 0), tuple);

        for (i, (prep, noun)) in recipients.iter().enumerate() {
            if let Some(p) = prep {
                used.insert(p.index);
                self.seen.insert(p.index);
            }
            used.insert(noun.index);
            let mut to = EatTuple::new(
                ClauseFeatures::preposition(Role::Event.as_prep_position()),
                WordSlot::word("to"),
                WordSlot::empty(),
                self.slot_for(noun, Role::Theme),
            );
            to.anchors = Anchors { event: prep.map(|p| p.index), agent: None, theme: Some(noun.index), attached_to: Some(v.index) };
            self.push((key_pos, i + 1), to);
        }

        for &u in &used {
            self.seen.insert(u);
        }
        if let Some(a) = agent_tok {
            self.modifiers(a, Role::Agent);
        }
        if let Some(t) = theme_tok {
            self.modifiers(t, Role::Theme);
        }
        for (_, noun) in &recipients {
            self.modifiers(noun, Role::Theme);
        }
        let own_role = if copular_theme.is_some() { Role::Theme } else { Role::Event };
        self.modifiers(v, own_role);
    }

    fn modifier_tuple(&mut self, c: &'g Token, head: &Token, role: Role) {
        let mut t = EatTuple::new(ClauseFeatures::non_verbal(), WordSlot::empty(), WordSlot::empty(), WordSlot::empty());
        *t.slot_mut(role) = self.slot_for(c, role);
        t.anchors.attached_to = Some(head.index);
        match role {
            Role::Event => t.anchors.event = Some(c.index),
            Role::Agent => t.anchors.agent = Some(c.index),
            Role::Theme => t.anchors.theme = Some(c.index),
        }
        self.push((c.index, 0), t);
    }

    fn prep_tuple(&mut self, prep: &'g Token, object: Option<&'g Token>, head: &Token, role: Role, key: usize) {
        let mut t = EatTuple::new(
            ClauseFeatures::preposition(role.as_prep_position()),
            WordSlot::word(prep.lemma.to_lowercase()),
            WordSlot::empty(),
            WordSlot::empty(),
        );
        t.anchors.event = Some(prep.index);
        t.anchors.attached_to = Some(head.index);
        if let Some(o) = object {
            self.seen.insert(o.index);
            t.theme = self.slot_for(o, Role::Theme);
            t.anchors.theme = Some(o.index);
        }
        self.push((key, 0), t);
        if let Some(o) = object {
            self.modifiers(o, Role::Theme);
        }
    }

    /// Dependents of `head` (standing in `role`) that become their own tuples.
    fn modifiers(&mut self, head: &'g Token, role: Role) {
        for c in self.children(head.index) {
            if !self.seen.insert(c.index) {
                continue;
            }
            let rel = c.relation();
            match rel {
                _ if is_negator(c) => {}
                "aux" if is_modal(c) => self.modifier_tuple(c, head, Role::Event),
                "poss" => {
                    let slot_role = if role == Role::Event { Role::Agent } else { role };
                    let mut t = EatTuple::new(ClauseFeatures::non_verbal(), WordSlot::empty(), WordSlot::empty(), WordSlot::empty());
                    let mut slot = self.slot_for(c, slot_role);
                    slot.possessive = true;
                    *t.slot_mut(slot_role) = slot;
                    t.anchors.attached_to = Some(head.index);
                    match slot_role {
                        Role::Agent => t.anchors.agent = Some(c.index),
                        _ => t.anchors.theme = Some(c.index),
                    }
                    self.push((c.index, 0), t);
                    self.modifiers(c, slot_role);
                }
                "prep" => {
                    let obj = self.prep_object(c);
                    self.prep_tuple(c, obj, head, role, c.index);
                    self.modifiers(c, role);
                }
                "obl" | "nmod" if self.case_marker(c).is_some() => {
                    let case = self.case_marker(c).expect("checked");
                    self.seen.insert(case.index);
                    self.prep_tuple(case, Some(c), head, role, case.index);
                }
                "relcl" if is_predicate(self.graph, c) => self.clause(c, Some(role), false),
                "conj" if role == Role::Event && is_predicate(self.graph, c) => self.clause(c, None, false),
                _ if CLAUSAL.contains(&rel) && is_predicate(self.graph, c) => self.clause(c, None, false),
                _ if PLAIN_MODIFIERS.contains(&rel) || CLAUSAL.contains(&rel) || matches!(rel, "conj" | "obl" | "nmod") => {
                    self.modifier_tuple(c, head, role);
                    self.modifiers(c, role);
                }
                _ => {}
            }
        }
    }
}
