//! Starred-predicate logical forms for inspecting EAT sequences.

use std::fmt;

use super::{EatSequence, PrepPosition, Role, WordSlot};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Conjunct {
    /// `W*(v)`
    Monadic { predicate: String, var: String },
    /// `R(a,b)`: thematic roles, prepositions and possession.
    Dyadic { relation: String, first: String, second: String },
}

impl fmt::Display for Conjunct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conjunct::Monadic { predicate, var } => write!(f, "{predicate}*({var})"),
            Conjunct::Dyadic { relation, first, second } => write!(f, "{relation}({first},{second})"),
        }
    }
}

/// A conjunction of predications, in rendering order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LfTerm {
    pub conjuncts: Vec<Conjunct>,
}

impl fmt::Display for LfTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.conjuncts.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∧ ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl LfTerm {
    /// Variables of dyadic relations that are neither event variables nor
    /// predicated by some monadic conjunct. Empty for well-formed output.
    pub fn unbound_relation_vars(&self) -> Vec<String> {
        let monadic: Vec<&str> = self
            .conjuncts
            .iter()
            .filter_map(|c| match c {
                Conjunct::Monadic { var, .. } => Some(var.as_str()),
                _ => None,
            })
            .collect();
        let mut out = Vec::new();
        for c in &self.conjuncts {
            if let Conjunct::Dyadic { first, second, .. } = c {
                for v in [first, second] {
                    if !v.starts_with('e') && !monadic.contains(&v.as_str()) && !out.contains(v) {
                        out.push(v.clone());
                    }
                }
            }
        }
        out
    }
}

struct Vars {
    events: usize,
    args: usize,
}

impl Vars {
    fn event(&mut self) -> String {
        let n = self.events;
        self.events += 1;
        match n {
            0 => "e".into(),
            1 => "e′".into(),
            2 => "e″".into(),
            3 => "e‴".into(),
            _ => format!("e{n}"),
        }
    }

    fn arg(&mut self) -> String {
        const POOL: [&str; 6] = ["x", "y", "z", "w", "v", "u"];
        let n = self.args;
        self.args += 1;
        match POOL.get(n) {
            Some(v) => (*v).to_string(),
            None => format!("x{}", n - POOL.len() + 1),
        }
    }
}

fn predicate(slot: &WordSlot) -> Option<String> {
    slot.lemma.as_ref().map(|l| l.to_uppercase())
}

fn monadic(slot: &WordSlot, var: &str) -> Option<Conjunct> {
    predicate(slot).map(|p| Conjunct::Monadic { predicate: p, var: var.to_string() })
}

fn dyadic(relation: &str, first: &str, second: &str) -> Conjunct {
    Conjunct::Dyadic { relation: relation.into(), first: first.into(), second: second.into() }
}

/// Builds the conjunction for a whole sequence.
pub fn lf_terms(seq: &EatSequence) -> LfTerm {
    let mut vars = Vars { events: 0, args: 0 };
    let mut out = LfTerm::default();
    // The variables later modifiers predicate over.
    let mut cur_event: Option<String> = None;
    let mut cur_agent: Option<String> = None;
    let mut cur_theme: Option<String> = None;

    for t in &seq.tuples {
        let mut mono = Vec::new();
        let mut dy = Vec::new();
        if t.clause.is_verbal() {
            let e = vars.event();
            let x = vars.arg();
            let y = vars.arg();
            mono.extend(monadic(&t.event, &e));
            for (slot, fresh, role) in [(&t.agent, x, "Ag"), (&t.theme, y, "Th")] {
                if slot.is_empty() {
                    continue;
                }
                let var = if slot.rp_agent {
                    cur_agent.clone().unwrap_or(fresh)
                } else if slot.rp_theme {
                    cur_theme.clone().unwrap_or(fresh)
                } else {
                    mono.extend(monadic(slot, &fresh));
                    fresh
                };
                dy.push(dyadic(role, &e, &var));
                if role == "Ag" {
                    cur_agent = Some(var);
                } else {
                    cur_theme = Some(var);
                }
            }
            cur_event = Some(e);
        } else if t.clause.prep_position != PrepPosition::None {
            let anchor = match t.clause.prep_position {
                PrepPosition::Agent => cur_agent.clone(),
                PrepPosition::Theme => cur_theme.clone(),
                _ => None,
            }
            .or_else(|| cur_event.clone())
            .unwrap_or_else(|| "e".into());
            let rel = predicate(&t.event).unwrap_or_default();
            if t.theme.is_empty() {
                mono.push(Conjunct::Monadic { predicate: rel, var: anchor });
            } else {
                let w = vars.arg();
                mono.extend(monadic(&t.theme, &w));
                dy.push(dyadic(&rel, &anchor, &w));
                cur_theme = Some(w);
            }
        } else {
            for role in Role::ALL {
                let slot = t.slot(role);
                if slot.is_empty() {
                    continue;
                }
                let current = match role {
                    Role::Event => cur_event.clone(),
                    Role::Agent => cur_agent.clone(),
                    Role::Theme => cur_theme.clone(),
                };
                if slot.possessive {
                    let z = vars.arg();
                    mono.extend(monadic(slot, &z));
                    if let Some(owned) = current {
                        dy.push(dyadic("POSS", &z, &owned));
                    }
                } else {
                    let var = current.unwrap_or_else(|| match role {
                        Role::Event => "e".into(),
                        _ => vars.arg(),
                    });
                    mono.extend(monadic(slot, &var));
                }
            }
        }
        out.conjuncts.extend(mono);
        out.conjuncts.extend(dy);
    }
    out
}

/// Renders the starred-predicate conjunction of a sequence.
pub fn render_lf(seq: &EatSequence) -> String {
    lf_terms(seq).to_string()
}
