use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::formula::{Alphabet, Formula, Letter, DEFAULT_AP_BOUND};
use super::progress::{Dnf, Progressor};
use crate::error::{Error, Result};

/// Complete deterministic automaton over the letters `2^AP`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    ap: Alphabet,
    initial: usize,
    accepting: Vec<bool>,
    /// `delta[state * n_letters + letter]`
    delta: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
pub struct DfaBounds {
    pub max_ap: usize,
    pub max_states: usize,
}

impl Default for DfaBounds {
    fn default() -> Self {
        DfaBounds {
            max_ap: DEFAULT_AP_BOUND,
            max_states: 100_000,
        }
    }
}

impl Dfa {
    /// Builds a DFA from a full transition table. Panics on shape mismatch.
    pub fn from_parts(ap: Alphabet, initial: usize, accepting: Vec<bool>, delta: Vec<usize>) -> Self {
        let n = accepting.len();
        assert_eq!(delta.len(), n * ap.n_letters(), "transition table shape");
        assert!(initial < n && delta.iter().all(|&t| t < n));
        Dfa {
            ap,
            initial,
            accepting,
            delta,
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.ap
    }

    pub fn n_states(&self) -> usize {
        self.accepting.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn next(&self, q: usize, a: Letter) -> usize {
        self.delta[q * self.ap.n_letters() + a.index()]
    }

    pub fn run(&self, word: &[Letter]) -> usize {
        word.iter().fold(self.initial, |q, &a| self.next(q, a))
    }

    pub fn accepts(&self, word: &[Letter]) -> bool {
        self.accepting[self.run(word)]
    }

    /// Language-equivalent DFA with the fewest states.
    ///
    /// Unreachable states are dropped, equivalent states are merged by Moore
    /// partition refinement, and the result is numbered in BFS order from the
    /// initial state visiting letters in increasing bitmask order.
    pub fn minimize(&self) -> Dfa {
        let nl = self.ap.n_letters();
        let n = self.n_states();
        let mut reach = vec![false; n];
        let mut queue = VecDeque::from([self.initial]);
        reach[self.initial] = true;
        while let Some(q) = queue.pop_front() {
            for a in 0..nl {
                let t = self.delta[q * nl + a];
                if !reach[t] {
                    reach[t] = true;
                    queue.push_back(t);
                }
            }
        }

        let mut class: Vec<usize> = self.accepting.iter().map(|&b| b as usize).collect();
        let mut n_classes = 0;
        loop {
            let mut sig_ids: HashMap<Vec<usize>, usize> = HashMap::new();
            let mut next = vec![usize::MAX; n];
            for q in (0..n).filter(|&q| reach[q]) {
                let mut sig = Vec::with_capacity(nl + 1);
                sig.push(class[q]);
                sig.extend((0..nl).map(|a| class[self.delta[q * nl + a]]));
                let fresh = sig_ids.len();
                next[q] = *sig_ids.entry(sig).or_insert(fresh);
            }
            let count = sig_ids.len();
            class = next;
            if count == n_classes {
                break;
            }
            n_classes = count;
        }

        let rep: HashMap<usize, usize> = (0..n).filter(|&q| reach[q]).map(|q| (class[q], q)).collect();
        let mut order: HashMap<usize, usize> = HashMap::new();
        let mut bfs = vec![class[self.initial]];
        order.insert(class[self.initial], 0);
        let mut i = 0;
        while i < bfs.len() {
            let q = rep[&bfs[i]];
            for a in 0..nl {
                let c = class[self.delta[q * nl + a]];
                if let std::collections::hash_map::Entry::Vacant(e) = order.entry(c) {
                    e.insert(bfs.len());
                    bfs.push(c);
                }
            }
            i += 1;
        }
        let m = bfs.len();
        let mut accepting = vec![false; m];
        let mut delta = vec![0; m * nl];
        for (new, c) in bfs.iter().enumerate() {
            let q = rep[c];
            accepting[new] = self.accepting[q];
            for a in 0..nl {
                delta[new * nl + a] = order[&class[self.delta[q * nl + a]]];
            }
        }
        Dfa {
            ap: self.ap.clone(),
            initial: 0,
            accepting,
            delta,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let transitions: Vec<serde_json::Value> = (0..self.n_states())
            .flat_map(|q| {
                self.ap
                    .letters()
                    .map(move |a| serde_json::json!([q, self.ap.letter_props(a), self.next(q, a)]))
            })
            .collect();
        serde_json::to_value(DfaJson {
            ap: self.ap.props().to_vec(),
            n_states: self.n_states(),
            initial: self.initial,
            accepting: (0..self.n_states()).filter(|&q| self.accepting[q]).collect(),
            transitions,
        })
        .expect("serializable")
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph dfa {\n  rankdir=LR;\n  __start [shape=point];\n");
        for q in 0..self.n_states() {
            let shape = if self.accepting[q] { "doublecircle" } else { "circle" };
            let _ = writeln!(s, "  q{q} [shape={shape}];");
        }
        let _ = writeln!(s, "  __start -> q{};", self.initial);
        for q in 0..self.n_states() {
            // group letters by target
            let mut by_target: Vec<(usize, Vec<String>)> = Vec::new();
            for a in self.ap.letters() {
                let t = self.next(q, a);
                let label = format!("{{{}}}", self.ap.letter_props(a).join(","));
                match by_target.iter_mut().find(|(x, _)| *x == t) {
                    Some((_, ls)) => ls.push(label),
                    None => by_target.push((t, vec![label])),
                }
            }
            for (t, ls) in by_target {
                let _ = writeln!(s, "  q{q} -> q{t} [label=\"{}\"];", ls.join(" "));
            }
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Serialize, Deserialize)]
struct DfaJson {
    ap: Vec<String>,
    n_states: usize,
    initial: usize,
    accepting: Vec<usize>,
    transitions: Vec<serde_json::Value>,
}

/// Compiles `f` to its minimal DFA over `2^ap`.
///
/// States are (obligation, last-letter verdict) pairs: reading `a` from
/// `(psi, _)` moves to `(progress(psi, a), last_value(psi, a))`, so a state
/// is accepting exactly when the word read so far satisfies `f`. The empty
/// word ends in the initial state, which is never accepting.
pub fn to_dfa(f: &Formula, ap: &Alphabet) -> Result<Dfa> {
    to_dfa_bounded(f, ap, DfaBounds::default())
}

pub fn to_dfa_bounded(f: &Formula, ap: &Alphabet, bounds: DfaBounds) -> Result<Dfa> {
    if ap.len() > bounds.max_ap {
        return Err(Error::AlphabetTooLarge {
            size: ap.len(),
            bound: bounds.max_ap,
        });
    }
    f.check_atoms(ap)?;
    let nl = ap.n_letters();
    let mut prog = Progressor::new(ap.clone());
    let init = (prog.normalize(f), false);

    let mut ids: HashMap<(Dnf, bool), usize> = HashMap::new();
    let mut states: Vec<(Dnf, bool)> = Vec::new();
    ids.insert(init.clone(), 0);
    states.push(init);
    let mut delta = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let obligation = states[i].0.clone();
        for a in ap.letters() {
            let next = (prog.progress(&obligation, a), prog.last_value(&obligation, a));
            let id = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    if states.len() >= bounds.max_states {
                        return Err(Error::StateBound(bounds.max_states));
                    }
                    let id = states.len();
                    ids.insert(next.clone(), id);
                    states.push(next);
                    id
                }
            };
            delta.push(id);
        }
        i += 1;
    }
    debug_assert_eq!(delta.len(), states.len() * nl);
    let accepting = states.iter().map(|(_, acc)| *acc).collect();
    Ok(Dfa {
        ap: ap.clone(),
        initial: 0,
        accepting,
        delta,
    }
    .minimize())
}
