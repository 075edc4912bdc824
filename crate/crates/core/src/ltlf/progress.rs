//! Formula progression over finite traces.
//!
//! Obligations are kept as a canonical disjunctive normal form over the
//! "temporal atoms" of the source formula: propositions and subformulas
//! headed by `X`, `U`, `F` or `G`. Clauses are sorted literal sets and
//! subsumed clauses are dropped, so two progressions that differ only by
//! ordering, duplication, double negation or constant folding intern to the
//! same key. The key space is finite because every temporal atom is a
//! subformula of the source.

use std::collections::{BTreeSet, HashMap};

use super::formula::{Alphabet, Formula, Letter};

/// Literal: temporal-atom id and polarity (`true` = positive).
pub type Lit = (usize, bool);
pub type Clause = BTreeSet<Lit>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dnf(BTreeSet<Clause>);

impl Dnf {
    pub fn tt() -> Self {
        Dnf(BTreeSet::from([Clause::new()]))
    }

    pub fn ff() -> Self {
        Dnf(BTreeSet::new())
    }

    pub fn lit(id: usize, pos: bool) -> Self {
        Dnf(BTreeSet::from([Clause::from([(id, pos)])]))
    }

    pub fn is_true(&self) -> bool {
        self.0.contains(&Clause::new())
    }

    pub fn is_false(&self) -> bool {
        self.0.is_empty()
    }

    pub fn clauses(&self) -> impl Iterator<Item = &Clause> {
        self.0.iter()
    }

    fn absorb(clauses: BTreeSet<Clause>) -> Self {
        let v: Vec<Clause> = clauses.into_iter().collect();
        let mut keep = BTreeSet::new();
        'outer: for (i, c) in v.iter().enumerate() {
            for (j, d) in v.iter().enumerate() {
                if i != j && d.len() < c.len() && d.is_subset(c) {
                    continue 'outer;
                }
            }
            keep.insert(c.clone());
        }
        Dnf(keep)
    }

    pub fn or(&self, other: &Dnf) -> Dnf {
        if self.is_true() || other.is_true() {
            return Dnf::tt();
        }
        Dnf::absorb(self.0.union(&other.0).cloned().collect())
    }

    pub fn and(&self, other: &Dnf) -> Dnf {
        let mut out = BTreeSet::new();
        for c in &self.0 {
            for d in &other.0 {
                let merged: Clause = c.union(d).copied().collect();
                if !merged.iter().any(|&(id, pos)| merged.contains(&(id, !pos))) {
                    out.insert(merged);
                }
            }
        }
        Dnf::absorb(out)
    }

    pub fn not(&self) -> Dnf {
        let mut acc = Dnf::tt();
        for c in &self.0 {
            let neg = Dnf::absorb(c.iter().map(|&(id, pos)| Clause::from([(id, !pos)])).collect());
            acc = acc.and(&neg);
            if acc.is_false() {
                break;
            }
        }
        acc
    }
}

/// Interning table of temporal atoms plus progression memo.
#[derive(Debug, Default)]
pub struct Progressor {
    atoms: Vec<Formula>,
    ids: HashMap<Formula, usize>,
    memo: HashMap<(usize, Letter), Dnf>,
    ap: Alphabet,
}

impl Progressor {
    pub fn new(ap: Alphabet) -> Self {
        Progressor {
            ap,
            ..Default::default()
        }
    }

    pub fn atom(&self, id: usize) -> &Formula {
        &self.atoms[id]
    }

    fn intern(&mut self, f: &Formula) -> usize {
        if let Some(&id) = self.ids.get(f) {
            return id;
        }
        let id = self.atoms.len();
        self.atoms.push(f.clone());
        self.ids.insert(f.clone(), id);
        id
    }

    pub fn normalize(&mut self, f: &Formula) -> Dnf {
        match f {
            Formula::True => Dnf::tt(),
            Formula::False => Dnf::ff(),
            Formula::Not(g) => self.normalize(g).not(),
            Formula::And(g, h) => {
                let a = self.normalize(g);
                let b = self.normalize(h);
                a.and(&b)
            }
            Formula::Or(g, h) => {
                let a = self.normalize(g);
                let b = self.normalize(h);
                a.or(&b)
            }
            Formula::Atom(_) | Formula::Next(_) | Formula::Until(..) | Formula::Eventually(_) | Formula::Always(_) => {
                Dnf::lit(self.intern(f), true)
            }
        }
    }

    /// Obligation remaining after reading `a`, assuming the trace continues.
    pub fn progress(&mut self, d: &Dnf, a: Letter) -> Dnf {
        let mut out = Dnf::ff();
        for clause in d.clauses() {
            let mut conj = Dnf::tt();
            for &(id, pos) in clause {
                let p = self.progress_atom(id, a);
                let p = if pos { p } else { p.not() };
                conj = conj.and(&p);
                if conj.is_false() {
                    break;
                }
            }
            out = out.or(&conj);
            if out.is_true() {
                break;
            }
        }
        out
    }

    fn progress_formula(&mut self, f: &Formula, a: Letter) -> Dnf {
        let d = self.normalize(f);
        self.progress(&d, a)
    }

    fn progress_atom(&mut self, id: usize, a: Letter) -> Dnf {
        if let Some(d) = self.memo.get(&(id, a)) {
            return d.clone();
        }
        let f = self.atoms[id].clone();
        let d = match &f {
            Formula::Atom(p) => {
                let i = self.ap.index_of(p).expect("atom in alphabet");
                if a.contains(i) {
                    Dnf::tt()
                } else {
                    Dnf::ff()
                }
            }
            Formula::Next(g) => self.normalize(g),
            Formula::Until(g, h) => {
                let now = self.progress_formula(h, a);
                let hold = self.progress_formula(g, a);
                now.or(&hold.and(&Dnf::lit(id, true)))
            }
            Formula::Eventually(g) => self.progress_formula(g, a).or(&Dnf::lit(id, true)),
            Formula::Always(g) => self.progress_formula(g, a).and(&Dnf::lit(id, true)),
            _ => unreachable!("boolean connectives are never interned"),
        };
        self.memo.insert((id, a), d.clone());
        d
    }

    /// Truth value of the obligation on a trace whose final letter is `a`.
    pub fn last_value(&self, d: &Dnf, a: Letter) -> bool {
        d.clauses().any(|c| {
            c.iter()
                .all(|&(id, pos)| last_value_formula(&self.atoms[id], &self.ap, a) == pos)
        })
    }

    /// Renders an obligation back into a formula for display.
    pub fn to_formula(&self, d: &Dnf) -> Formula {
        let mut disj: Option<Formula> = None;
        for c in d.clauses() {
            let mut conj: Option<Formula> = None;
            for &(id, pos) in c {
                let l = if pos {
                    self.atoms[id].clone()
                } else {
                    Formula::not(self.atoms[id].clone())
                };
                conj = Some(match conj {
                    None => l,
                    Some(x) => Formula::and(x, l),
                });
            }
            let c = conj.unwrap_or(Formula::True);
            disj = Some(match disj {
                None => c,
                Some(x) => Formula::or(x, c),
            });
        }
        disj.unwrap_or(Formula::False)
    }
}

/// Satisfaction of `f` on the single-letter trace `[a]`.
pub fn last_value_formula(f: &Formula, ap: &Alphabet, a: Letter) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(p) => a.contains(ap.index_of(p).expect("atom in alphabet")),
        Formula::Not(g) => !last_value_formula(g, ap, a),
        Formula::And(g, h) => last_value_formula(g, ap, a) && last_value_formula(h, ap, a),
        Formula::Or(g, h) => last_value_formula(g, ap, a) || last_value_formula(h, ap, a),
        Formula::Next(_) => false,
        Formula::Until(_, h) => last_value_formula(h, ap, a),
        Formula::Eventually(g) | Formula::Always(g) => last_value_formula(g, ap, a),
    }
}

/// Progresses a formula through one letter and returns it as a formula.
pub fn progress_formula(f: &Formula, ap: &Alphabet, a: Letter) -> Formula {
    let mut p = Progressor::new(ap.clone());
    let d = p.normalize(f);
    let next = p.progress(&d, a);
    p.to_formula(&next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltlf::parse_ltlf;

    #[test]
    fn dnf_algebra() {
        let x = Dnf::lit(0, true);
        let y = Dnf::lit(1, true);
        assert!(x.and(&x.not()).is_false());
        assert_eq!(x.or(&x.and(&y)), x);
        assert_eq!(x.not().not(), x);
        assert_eq!(x.and(&y), y.and(&x));
        assert!(Dnf::tt().not().is_false());
        assert!(Dnf::ff().not().is_true());
    }

    #[test]
    fn eventually_progression() {
        let ap = Alphabet::new(["p"]);
        let f = parse_ltlf("F p", Some(&ap)).unwrap();
        assert_eq!(progress_formula(&f, &ap, Letter(1)), Formula::True);
        assert_eq!(progress_formula(&f, &ap, Letter(0)), f);
    }
}
