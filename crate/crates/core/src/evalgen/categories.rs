//! The twelve grammatical classes and the fourteen transformation directions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::eatcore::{ClauseFeatures, Force, Voice};
use crate::transform::{Tense, TransformSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Declarative,
    Question,
    Affirmed,
    Negated,
    Active,
    Passive,
    Present,
    Past,
    Perfect,
    Pluperfect,
    Perfective,
    Imperfective,
}

impl Category {
    pub const ALL: [Category; 12] = [
        Category::Declarative,
        Category::Question,
        Category::Affirmed,
        Category::Negated,
        Category::Active,
        Category::Passive,
        Category::Present,
        Category::Past,
        Category::Perfect,
        Category::Pluperfect,
        Category::Perfective,
        Category::Imperfective,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Declarative => "declarative",
            Category::Question => "question",
            Category::Affirmed => "affirmed",
            Category::Negated => "negated",
            Category::Active => "active",
            Category::Passive => "passive",
            Category::Present => "present",
            Category::Past => "past",
            Category::Perfect => "perfect",
            Category::Pluperfect => "pluperfect",
            Category::Perfective => "perfective",
            Category::Imperfective => "imperfective",
        }
    }

    pub fn holds(self, c: &ClauseFeatures) -> bool {
        match self {
            Category::Declarative => c.force == Force::Declarative,
            Category::Question => c.force == Force::Question,
            Category::Affirmed => c.truth,
            Category::Negated => !c.truth,
            Category::Active => c.voice == Voice::Active,
            Category::Passive => c.voice == Voice::Passive,
            Category::Present => c.is_verbal() && Tense::of(c) == Tense::Present,
            Category::Past => c.is_verbal() && Tense::of(c) == Tense::Past,
            Category::Perfect => c.is_verbal() && Tense::of(c) == Tense::Perfect,
            Category::Pluperfect => c.is_verbal() && Tense::of(c) == Tense::Pluperfect,
            Category::Perfective => c.is_verbal() && !c.imperfective,
            Category::Imperfective => c.is_verbal() && c.imperfective,
        }
    }

    /// The single-dimension edit that moves a clause into this class.
    pub fn as_spec(self) -> TransformSpec {
        let mut s = TransformSpec::identity();
        match self {
            Category::Declarative => s.force = Some(Force::Declarative),
            Category::Question => s.force = Some(Force::Question),
            Category::Affirmed => s.truth = Some(true),
            Category::Negated => s.truth = Some(false),
            Category::Active => s.voice = Some(Voice::Active),
            Category::Passive => s.voice = Some(Voice::Passive),
            Category::Present => s.tense = Some(Tense::Present),
            Category::Past => s.tense = Some(Tense::Past),
            Category::Perfect => s.tense = Some(Tense::Perfect),
            Category::Pluperfect => s.tense = Some(Tense::Pluperfect),
            Category::Perfective => s.imperfective = Some(false),
            Category::Imperfective => s.imperfective = Some(true),
        }
        s
    }

    /// Index of the dimension (force, truth, voice, tense, aspect).
    pub fn dimension(self) -> usize {
        match self {
            Category::Declarative | Category::Question => 0,
            Category::Affirmed | Category::Negated => 1,
            Category::Active | Category::Passive => 2,
            Category::Present | Category::Past | Category::Perfect | Category::Pluperfect => 3,
            Category::Perfective | Category::Imperfective => 4,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_lowercase();
        Category::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| format!("unknown category {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Direction {
    pub from: Category,
    pub to: Category,
}

impl Direction {
    pub fn new(from: Category, to: Category) -> Result<Self, String> {
        if from == to || from.dimension() != to.dimension() {
            return Err(format!("{from} and {to} are not alternatives of one another"));
        }
        Ok(Direction { from, to })
    }

    pub fn reversed(self) -> Direction {
        Direction { from: self.to, to: self.from }
    }

    /// Both directions for force, truth, voice and aspect, and present
    /// against each other tense.
    pub fn all() -> Vec<Direction> {
        use Category::*;
        [
            (Declarative, Question),
            (Affirmed, Negated),
            (Active, Passive),
            (Present, Past),
            (Present, Perfect),
            (Present, Pluperfect),
            (Perfective, Imperfective),
        ]
        .into_iter()
        .flat_map(|(a, b)| [Direction { from: a, to: b }, Direction { from: b, to: a }])
        .collect()
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.from, self.to)
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("direction {s:?} is not of the form from:to"))?;
        Direction::new(a.parse()?, b.parse()?)
    }
}
