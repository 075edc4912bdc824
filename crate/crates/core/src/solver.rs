//! Qualitative almost-sure reachability for concurrent games and the
//! rank-layered synthesis of non-dominated almost-sure winning strategies.
//!
//! The almost-sure region is the two-level fixpoint
//!
//! ```text
//! nu Y. mu X. (target ∩ Y) ∪ apre(Y, X)
//! ```
//!
//! where `apre(Y, X)` holds at `v` when the player's safe actions at `v`
//! (those that keep every successor in `Y` whatever the opponent plays)
//! reach `X` with positive probability against every opponent action.
//! Only supports matter: playing every safe action with positive
//! probability is as good as any other distribution over them.

use serde::Serialize;

use crate::game::{ConcurrentGame, Player, Strategy};
use crate::product::ProductGame;

/// Membership vector over game states.
pub type StateSet = Vec<bool>;

pub fn set_of(n: usize, members: impl IntoIterator<Item = usize>) -> StateSet {
    let mut s = vec![false; n];
    for v in members {
        s[v] = true;
    }
    s
}

pub fn members(s: &[bool]) -> Vec<usize> {
    (0..s.len()).filter(|&v| s[v]).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Telemetry {
    pub aswin_calls: usize,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub player: Player,
    pub region: StateSet,
    pub target: StateSet,
    pub strategy: Strategy,
    /// Rank level reached by [`ndaswin`]; `None` for a plain [`aswin`] call.
    pub level: Option<usize>,
    pub telemetry: Telemetry,
}

impl SolveResult {
    pub fn region_size(&self) -> usize {
        self.region.iter().filter(|&&b| b).count()
    }

    pub fn to_json(&self, g: &ConcurrentGame) -> serde_json::Value {
        let mut j = self.strategy.to_json(g);
        j["level_k"] = match self.level {
            Some(k) => serde_json::json!(k),
            None => serde_json::Value::Null,
        };
        j["region"] = serde_json::json!(members(&self.region)
            .into_iter()
            .map(|v| g.state_name(v).to_string())
            .collect::<Vec<_>>());
        j
    }
}

/// Actions of `player` at `v` whose successors stay inside `y` against
/// every opponent action.
pub fn safe_support(g: &ConcurrentGame, v: usize, y: &[bool], player: Player) -> Vec<usize> {
    let nm = g.n_actions(player);
    let no = g.n_actions(player.opponent());
    (0..nm)
        .filter(|&a| {
            (0..no).all(|b| {
                g.dist_for(player, v, a, b)
                    .iter()
                    .all(|&(t, p)| *p.numer() == 0 || y[t])
            })
        })
        .collect()
}

fn hits(g: &ConcurrentGame, player: Player, v: usize, safe: &[usize], x: &[bool]) -> bool {
    !safe.is_empty()
        && (0..g.n_actions(player.opponent())).all(|b| {
            safe.iter().any(|&a| {
                g.dist_for(player, v, a, b)
                    .iter()
                    .any(|&(t, p)| *p.numer() != 0 && x[t])
            })
        })
}

/// One application of the positive-progress predecessor operator.
pub fn apre(g: &ConcurrentGame, y: &[bool], x: &[bool], target: &[bool], player: Player) -> StateSet {
    (0..g.n_states())
        .map(|v| y[v] && !target[v] && hits(g, player, v, &safe_support(g, v, y, player), x))
        .collect()
}

fn predecessors(g: &ConcurrentGame) -> Vec<Vec<usize>> {
    let mut pred = vec![Vec::new(); g.n_states()];
    for v in 0..g.n_states() {
        for a1 in 0..g.n_actions(Player::One) {
            for a2 in 0..g.n_actions(Player::Two) {
                for t in g.support(v, a1, a2) {
                    if pred[t].last() != Some(&v) {
                        pred[t].push(v);
                    }
                }
            }
        }
    }
    for p in &mut pred {
        p.sort_unstable();
        p.dedup();
    }
    pred
}

/// Almost-sure winning region and strategy for reaching `target`.
///
/// The strategy is uniform over the safe actions (relative to the region)
/// on `region \ target` and undefined elsewhere, so it stops on arrival.
pub fn aswin(g: &ConcurrentGame, target: &[bool], player: Player) -> SolveResult {
    let pred = predecessors(g);
    aswin_with(g, target, player, &pred)
}

fn aswin_with(g: &ConcurrentGame, target: &[bool], player: Player, pred: &[Vec<usize>]) -> SolveResult {
    let n = g.n_states();
    let mut tel = Telemetry {
        aswin_calls: 1,
        ..Default::default()
    };
    let mut y: StateSet = vec![true; n];
    let mut safe: Vec<Vec<usize>> = vec![Vec::new(); n];
    loop {
        tel.outer_iterations += 1;
        for v in 0..n {
            safe[v] = if y[v] && !target[v] {
                safe_support(g, v, &y, player)
            } else {
                Vec::new()
            };
        }
        // least fixpoint, grown along predecessor edges
        let mut x: StateSet = (0..n).map(|v| y[v] && target[v]).collect();
        let mut frontier: Vec<usize> = members(&x);
        while !frontier.is_empty() {
            tel.inner_iterations += 1;
            let mut candidates: Vec<usize> = frontier
                .iter()
                .flat_map(|&t| pred[t].iter().copied())
                .filter(|&v| y[v] && !x[v] && !target[v])
                .collect();
            candidates.sort_unstable();
            candidates.dedup();
            let added: Vec<usize> = candidates
                .into_iter()
                .filter(|&v| hits(g, player, v, &safe[v], &x))
                .collect();
            for &v in &added {
                x[v] = true;
            }
            frontier = added;
        }
        if x == y {
            break;
        }
        y = x;
    }
    let mut strategy = Strategy::undefined(player, n);
    for v in 0..n {
        if y[v] && !target[v] {
            let s = safe_support(g, v, &y, player);
            strategy.set_uniform(v, &s);
        }
    }
    SolveResult {
        player,
        region: y,
        target: target.to_vec(),
        strategy,
        level: None,
        telemetry: tel,
    }
}

/// States whose `player` rank is at most `k`.
pub fn rank_target(h: &ProductGame, player: Player, k: usize) -> StateSet {
    (0..h.n_states()).map(|v| h.rank(player, v) <= k).collect()
}

/// Smallest rank level `k` such that `player` can almost-surely reach a
/// state of rank at most `k` from the initial state, with the matching
/// strategy. Always succeeds by `k = rank(v0)`.
pub fn ndaswin(h: &ProductGame, player: Player) -> SolveResult {
    let g = h.game();
    let pred = predecessors(g);
    let mut total = Telemetry::default();
    for k in 0..=h.kmax(player) {
        let target = rank_target(h, player, k);
        let mut res = aswin_with(g, &target, player, &pred);
        total.aswin_calls += 1;
        total.outer_iterations += res.telemetry.outer_iterations;
        total.inner_iterations += res.telemetry.inner_iterations;
        if res.region[h.init()] {
            res.level = Some(k);
            res.telemetry = total;
            return res;
        }
    }
    unreachable!("the initial state is a target at its own rank")
}
