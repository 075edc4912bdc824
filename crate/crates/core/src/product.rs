//! Product of a game with a preference automaton.
//!
//! Product states are reachable `(s, q)` pairs. Moving to game state `s'`
//! moves the automaton on the label of `s'`, so `q` always summarizes the
//! trace of the play so far. Player 1 compares product states by their
//! automaton components; player 2 uses the reverse relation.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::game::{ConcurrentGame, Path, Player, Prob};
use crate::order::{Comparison, Preorder};
use crate::preference::PreferenceAutomaton;
use crate::rank::{compute_ranks, product_ranks, RankAssignment};

pub const DEFAULT_PRODUCT_STATE_BOUND: usize = 2_000_000;

#[derive(Debug, Clone)]
pub struct ProductGame {
    game: ConcurrentGame,
    base_names: Vec<String>,
    pairs: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
    automaton: PreferenceAutomaton,
    ranks: Option<(RankAssignment, RankAssignment)>,
    kmax: (usize, usize),
}

pub fn build_product(g: &ConcurrentGame, pa: &PreferenceAutomaton) -> Result<ProductGame> {
    build_product_bounded(g, pa, DEFAULT_PRODUCT_STATE_BOUND)
}

pub fn build_product_bounded(g: &ConcurrentGame, pa: &PreferenceAutomaton, max_states: usize) -> Result<ProductGame> {
    for p in pa.alphabet().props() {
        if g.alphabet().index_of(p).is_none() {
            return Err(Error::UndeclaredAtom(p.clone()));
        }
    }
    let pa_label: Vec<_> = (0..g.n_states())
        .map(|s| pa.alphabet().project(g.alphabet(), g.label(s)))
        .collect();
    let n1 = g.n_actions(Player::One);
    let n2 = g.n_actions(Player::Two);

    let v0 = (g.init(), pa.next(pa.initial(), pa_label[g.init()]));
    let mut index = HashMap::from([(v0, 0usize)]);
    let mut pairs = vec![v0];
    let mut rows: Vec<Vec<crate::game::Dist>> = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let (s, q) = pairs[i];
        let mut row = Vec::with_capacity(n1 * n2);
        for a1 in 0..n1 {
            for a2 in 0..n2 {
                let mut dist = Vec::new();
                for &(t, p) in g.dist(s, a1, a2) {
                    if t >= g.n_states() {
                        return Err(Error::Invalid(format!("successor {t} undeclared")));
                    }
                    let key = (t, pa.next(q, pa_label[t]));
                    let id = match index.get(&key) {
                        Some(&id) => id,
                        None => {
                            if pairs.len() >= max_states {
                                return Err(Error::StateBound(max_states));
                            }
                            let id = pairs.len();
                            index.insert(key, id);
                            pairs.push(key);
                            id
                        }
                    };
                    dist.push((id, p));
                }
                row.push(dist);
            }
        }
        rows.push(row);
        i += 1;
    }

    let names: Vec<String> = pairs
        .iter()
        .map(|&(s, q)| format!("{}|q{q}", g.state_name(s)))
        .collect();
    let labels = pairs.iter().map(|&(s, _)| g.label(s)).collect();
    let mut game = ConcurrentGame::new(
        names,
        g.alphabet().clone(),
        labels,
        g.actions(Player::One).to_vec(),
        g.actions(Player::Two).to_vec(),
        0,
    );
    for (v, row) in rows.into_iter().enumerate() {
        for (k, dist) in row.into_iter().enumerate() {
            game.set_transition(v, k / n2, k % n2, dist);
        }
    }
    let mut h = ProductGame {
        game,
        base_names: g.state_names().to_vec(),
        pairs,
        index,
        automaton: pa.clone(),
        ranks: None,
        kmax: (0, 0),
    };
    let on_q = compute_ranks(pa.order()).expect("automaton order is a preorder");
    let on_q2 = compute_ranks(&pa.order().transpose()).expect("automaton order is a preorder");
    h.kmax = (on_q.kmax(), on_q2.kmax());
    let r1 = product_ranks(&h, Player::One);
    let r2 = product_ranks(&h, Player::Two);
    h.ranks = Some((r1, r2));
    Ok(h)
}

impl ProductGame {
    /// The product viewed as a concurrent game.
    pub fn game(&self) -> &ConcurrentGame {
        &self.game
    }

    pub fn automaton(&self) -> &PreferenceAutomaton {
        &self.automaton
    }

    pub fn n_states(&self) -> usize {
        self.pairs.len()
    }

    pub fn init(&self) -> usize {
        0
    }

    pub fn pair(&self, v: usize) -> (usize, usize) {
        self.pairs[v]
    }

    pub fn lookup(&self, s: usize, q: usize) -> Option<usize> {
        self.index.get(&(s, q)).copied()
    }

    /// `u` weakly preferred to `v` by `player`.
    pub fn prefers(&self, player: Player, u: usize, v: usize) -> bool {
        let (qu, qv) = (self.pairs[u].1, self.pairs[v].1);
        match player {
            Player::One => self.automaton.order().ge(qu, qv),
            Player::Two => self.automaton.order().ge(qv, qu),
        }
    }

    pub fn strictly_prefers(&self, player: Player, u: usize, v: usize) -> bool {
        self.prefers(player, u, v) && !self.prefers(player, v, u)
    }

    pub fn compare(&self, player: Player, u: usize, v: usize) -> Comparison {
        Comparison::from_weak(self.prefers(player, u, v), self.prefers(player, v, u))
    }

    /// Materialized `|V| x |V|` preorder; intended for small products.
    pub fn preorder(&self, player: Player) -> Preorder {
        Preorder::from_fn(self.n_states(), |u, v| self.prefers(player, u, v))
    }

    pub fn ranks(&self, player: Player) -> &RankAssignment {
        let (r1, r2) = self.ranks.as_ref().expect("ranks computed at build");
        match player {
            Player::One => r1,
            Player::Two => r2,
        }
    }

    pub fn rank(&self, player: Player, v: usize) -> usize {
        self.ranks(player).rank(v)
    }

    /// Largest rank on the automaton's full rank scale. States realizing it
    /// need not be reachable in the product.
    pub fn kmax(&self, player: Player) -> usize {
        match player {
            Player::One => self.kmax.0,
            Player::Two => self.kmax.1,
        }
    }

    /// Lifts a game path from the initial state into the product.
    pub fn trace_in_product(&self, g: &ConcurrentGame, p: &Path) -> Result<Path> {
        let pa = &self.automaton;
        let s0 = p.states()[0];
        if s0 != g.init() {
            return Err(Error::Invalid("path must start at the initial state".into()));
        }
        let mut q = pa.initial();
        let mut out = Vec::with_capacity(p.len());
        for &s in p.states() {
            q = pa.next(q, pa.alphabet().project(g.alphabet(), g.label(s)));
            let v = self
                .lookup(s, q)
                .ok_or_else(|| Error::Invalid(format!("({s}, {q}) is not a reachable product state")))?;
            out.push(v);
        }
        Ok(Path::new(out))
    }

    /// Transition sanity in the same terms as game validation.
    pub fn validate(&self) -> Vec<String> {
        let mut out = self.game.validate();
        let zero = Prob::from_integer(0);
        let n2 = self.game.n_actions(Player::Two);
        for v in 0..self.n_states() {
            for a1 in 0..self.game.n_actions(Player::One) {
                for a2 in 0..n2 {
                    for &(t, p) in self.game.dist(v, a1, a2) {
                        let (s2, q2) = self.pairs[t];
                        let l = self
                            .automaton
                            .alphabet()
                            .project(self.game.alphabet(), self.game.label(t));
                        if p > zero && self.automaton.next(self.pairs[v].1, l) != q2 {
                            out.push(format!("edge {v} -> {t} breaks automaton tracking (s' = {s2})"));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut j = self.game.to_json();
        let annotations: Vec<serde_json::Value> = (0..self.n_states())
            .map(|v| {
                let (s, q) = self.pairs[v];
                serde_json::json!({
                    "state": self.game.state_name(v),
                    "s": self.base_names[s],
                    "q": q,
                    "rank1": self.rank(Player::One, v),
                    "rank2": self.rank(Player::Two, v),
                })
            })
            .collect();
        j["product"] = serde_json::Value::Array(annotations);
        j
    }

    pub fn to_dot(&self) -> Result<String> {
        if self.n_states() > 200 {
            return Err(Error::BoundsExceeded(format!(
                "DOT export limited to 200 states, product has {}",
                self.n_states()
            )));
        }
        let g = &self.game;
        let mut s = String::from("digraph product {\n");
        for v in 0..self.n_states() {
            let _ = writeln!(
                s,
                "  v{v} [label=\"{} r1={} r2={}\"];",
                g.state_name(v),
                self.rank(Player::One, v),
                self.rank(Player::Two, v)
            );
        }
        for v in 0..self.n_states() {
            let mut succ: Vec<usize> = (0..g.n_actions(Player::One))
                .flat_map(|a1| (0..g.n_actions(Player::Two)).map(move |a2| (a1, a2)))
                .flat_map(|(a1, a2)| g.support(v, a1, a2).collect::<Vec<_>>())
                .collect();
            succ.sort_unstable();
            succ.dedup();
            for t in succ {
                let _ = writeln!(s, "  v{v} -> v{t};");
            }
        }
        s.push_str("}\n");
        Ok(s)
    }
}
