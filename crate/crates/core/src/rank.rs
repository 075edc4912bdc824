//! Maximal elements of preorders and the rank layering.
//!
//! `Max(U)` is the set of elements of `U` with nothing in `U` strictly
//! above them. Rank 0 is `Max(V)`, rank 1 is `Max` of what remains, and so
//! on. Lower rank is never worse.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::Result;
use crate::game::Player;
use crate::order::Preorder;
use crate::product::ProductGame;

pub fn max_elements(u: &[usize], r: &Preorder) -> Vec<usize> {
    u.iter().copied().filter(|&x| !u.iter().any(|&y| r.gt(y, x))).collect()
}

pub fn min_elements(u: &[usize], r: &Preorder) -> Vec<usize> {
    u.iter().copied().filter(|&x| !u.iter().any(|&y| r.gt(x, y))).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankAssignment {
    ranks: Vec<usize>,
    layers: Vec<Vec<usize>>,
}

impl RankAssignment {
    fn from_ranks(ranks: Vec<usize>) -> Self {
        let kmax = ranks.iter().copied().max().unwrap_or(0);
        let mut layers = vec![Vec::new(); if ranks.is_empty() { 0 } else { kmax + 1 }];
        for (v, &k) in ranks.iter().enumerate() {
            layers[k].push(v);
        }
        RankAssignment { ranks, layers }
    }

    pub fn rank(&self, v: usize) -> usize {
        self.ranks[v]
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn kmax(&self) -> usize {
        self.layers.len().saturating_sub(1)
    }

    pub fn layers(&self) -> &[Vec<usize>] {
        &self.layers
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// Composes with a node map: node `v` of the result gets `self.rank(map[v])`.
    pub fn project(&self, map: &[usize]) -> RankAssignment {
        RankAssignment::from_ranks(map.iter().map(|&q| self.ranks[q]).collect())
    }

    /// Wraps an arbitrary rank table, e.g. to feed a checker a corrupted one.
    pub fn from_table(ranks: Vec<usize>) -> Self {
        RankAssignment::from_ranks(ranks)
    }
}

/// Ranks of every node of a preorder.
///
/// A node's rank is the length of the longest strictly increasing chain
/// above it. Nodes are processed by their number of strict superiors, which
/// is a topological order of the strict part.
pub fn compute_ranks(r: &Preorder) -> Result<RankAssignment> {
    r.validate()?;
    let n = r.len();
    let above: Vec<usize> = (0..n).map(|v| (0..n).filter(|&u| r.gt(u, v)).count()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| above[v]);
    let mut ranks = vec![0usize; n];
    for (i, &v) in order.iter().enumerate() {
        ranks[v] = order[..i]
            .iter()
            .filter(|&&u| r.gt(u, v))
            .map(|&u| ranks[u] + 1)
            .max()
            .unwrap_or(0);
    }
    Ok(RankAssignment::from_ranks(ranks))
}

/// Ranks by literally peeling `Max` layers. Quadratic per layer; used to
/// cross-check [`compute_ranks`].
pub fn peel_ranks(r: &Preorder) -> Result<RankAssignment> {
    r.validate()?;
    let mut remaining: Vec<usize> = (0..r.len()).collect();
    let mut ranks = vec![0; r.len()];
    let mut k = 0;
    while !remaining.is_empty() {
        let layer = max_elements(&remaining, r);
        for &v in &layer {
            ranks[v] = k;
        }
        remaining.retain(|v| !layer.contains(v));
        k += 1;
    }
    Ok(RankAssignment::from_ranks(ranks))
}

/// Player ranks over product states, computed on the preference automaton
/// and projected through each state's automaton component.
pub fn product_ranks(h: &ProductGame, player: Player) -> RankAssignment {
    let order = match player {
        Player::One => h.automaton().order().clone(),
        Player::Two => h.automaton().order().transpose(),
    };
    let on_q = compute_ranks(&order).expect("automaton order is a preorder");
    let map: Vec<usize> = (0..h.n_states()).map(|v| h.pair(v).1).collect();
    on_q.project(&map)
}

/// `node,rank1,rank2` table.
pub fn rank_csv(names: &[String], rank1: &RankAssignment, rank2: &RankAssignment) -> String {
    let mut s = String::from("node,rank1,rank2\n");
    for (v, name) in names.iter().enumerate() {
        let _ = writeln!(s, "{name},{},{}", rank1.rank(v), rank2.rank(v));
    }
    s
}
