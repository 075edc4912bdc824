use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// LTLf abstract syntax.
///
/// `Eventually` and `Always` are kept as their own variants so parse trees
/// round-trip, but every semantic routine treats them as `true U f` and
/// `!F !f` respectively.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Formula {
    True,
    False,
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
    Always(Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(f: Formula, g: Formula) -> Self {
        Formula::And(Box::new(f), Box::new(g))
    }

    pub fn or(f: Formula, g: Formula) -> Self {
        Formula::Or(Box::new(f), Box::new(g))
    }

    pub fn next(f: Formula) -> Self {
        Formula::Next(Box::new(f))
    }

    pub fn until(f: Formula, g: Formula) -> Self {
        Formula::Until(Box::new(f), Box::new(g))
    }

    pub fn eventually(f: Formula) -> Self {
        Formula::Eventually(Box::new(f))
    }

    pub fn always(f: Formula) -> Self {
        Formula::Always(Box::new(f))
    }

    /// Rewrites `F` and `G` into the core grammar.
    pub fn expand_derived(&self) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => self.clone(),
            Formula::Not(f) => Formula::not(f.expand_derived()),
            Formula::And(f, g) => Formula::and(f.expand_derived(), g.expand_derived()),
            Formula::Or(f, g) => Formula::or(f.expand_derived(), g.expand_derived()),
            Formula::Next(f) => Formula::next(f.expand_derived()),
            Formula::Until(f, g) => Formula::until(f.expand_derived(), g.expand_derived()),
            Formula::Eventually(f) => Formula::until(Formula::True, f.expand_derived()),
            Formula::Always(f) => Formula::not(Formula::until(Formula::True, Formula::not(f.expand_derived()))),
        }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(p) => {
                out.insert(p.clone());
            }
            Formula::Not(f) | Formula::Next(f) | Formula::Eventually(f) | Formula::Always(f) => f.collect_atoms(out),
            Formula::And(f, g) | Formula::Or(f, g) | Formula::Until(f, g) => {
                f.collect_atoms(out);
                g.collect_atoms(out);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::Not(f) | Formula::Next(f) | Formula::Eventually(f) | Formula::Always(f) => 1 + f.depth(),
            Formula::And(f, g) | Formula::Or(f, g) | Formula::Until(f, g) => 1 + f.depth().max(g.depth()),
        }
    }

    /// Checks that every atom is declared in `ap`.
    pub fn check_atoms(&self, ap: &Alphabet) -> Result<()> {
        for a in self.atoms() {
            if ap.index_of(&a).is_none() {
                return Err(Error::UndeclaredAtom(a));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(p) => write!(f, "{p}"),
            Formula::Not(g) => write!(f, "!{g}"),
            Formula::And(g, h) => write!(f, "({g} & {h})"),
            Formula::Or(g, h) => write!(f, "({g} | {h})"),
            Formula::Next(g) => write!(f, "X {g}"),
            Formula::Until(g, h) => write!(f, "({g} U {h})"),
            Formula::Eventually(g) => write!(f, "F {g}"),
            Formula::Always(g) => write!(f, "G {g}"),
        }
    }
}

/// An ordered, duplicate-free list of atomic propositions.
///
/// Propositions are kept sorted so a [`Letter`] bitmask has one meaning
/// regardless of declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Alphabet {
    props: Vec<String>,
}

/// Upper bound on `|AP|` accepted by the DFA construction unless overridden.
pub const DEFAULT_AP_BOUND: usize = 12;

impl Alphabet {
    pub fn new<I, S>(props: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = props.into_iter().map(Into::into).collect();
        Alphabet {
            props: set.into_iter().collect(),
        }
    }

    pub fn props(&self) -> &[String] {
        &self.props
    }

    pub fn len(&self) -> usize {
        self.props.len()
    }

    pub fn is_empty(&self) -> bool {
        self.props.is_empty()
    }

    pub fn index_of(&self, p: &str) -> Option<usize> {
        self.props.binary_search_by(|x| x.as_str().cmp(p)).ok()
    }

    /// Number of letters, `2^|AP|`.
    pub fn n_letters(&self) -> usize {
        1usize << self.props.len()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        (0..self.n_letters() as u32).map(Letter)
    }

    pub fn letter<I, S>(&self, props: I) -> Result<Letter>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut bits = 0u32;
        for p in props {
            let p = p.as_ref();
            let i = self
                .index_of(p)
                .ok_or_else(|| Error::LetterOutsideAlphabet(p.to_string()))?;
            bits |= 1 << i;
        }
        Ok(Letter(bits))
    }

    pub fn letter_props(&self, l: Letter) -> Vec<String> {
        self.props
            .iter()
            .enumerate()
            .filter(|(i, _)| l.contains(*i))
            .map(|(_, p)| p.clone())
            .collect()
    }

    pub fn contains_letter(&self, l: Letter) -> bool {
        (l.0 as usize) < self.n_letters()
    }

    /// Re-expresses a letter of `other` over `self`, dropping unknown propositions.
    pub fn project(&self, other: &Alphabet, l: Letter) -> Letter {
        let mut bits = 0u32;
        for (i, p) in other.props.iter().enumerate() {
            if l.contains(i) {
                if let Some(j) = self.index_of(p) {
                    bits |= 1 << j;
                }
            }
        }
        Letter(bits)
    }
}

/// One position of a trace: the set of propositions that hold, as a bitmask
/// over the sorted propositions of an [`Alphabet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Letter(pub u32);

impl Letter {
    pub fn contains(self, index: usize) -> bool {
        self.0 >> index & 1 == 1
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}
