//! Verification oracles over product games: outcome sets, dominance between
//! strategy profiles, brute-force checks of non-domination and Nash
//! stability, rank identities and Monte Carlo estimates.
//!
//! Exhaustive checks enumerate strategies by their supports only. Whether a
//! state is reachable under a profile depends on nothing else, so this
//! enumeration covers every memoryless randomized strategy.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::game::{rollout, ConcurrentGame, Player, StopReason, Strategy};
use crate::product::ProductGame;
use crate::rank::RankAssignment;

/// Size limits for exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumBounds {
    pub max_states: usize,
    pub max_actions: usize,
}

impl Default for EnumBounds {
    fn default() -> Self {
        EnumBounds {
            max_states: 6,
            max_actions: 2,
        }
    }
}

fn check_bounds(h: &ProductGame, b: EnumBounds) -> Result<()> {
    let g = h.game();
    let n1 = g.n_actions(Player::One);
    let n2 = g.n_actions(Player::Two);
    if h.n_states() > b.max_states || n1 > b.max_actions || n2 > b.max_actions {
        return Err(Error::BoundsExceeded(format!(
            "enumeration needs |V| <= {} and <= {} actions per player, got |V| = {}, actions {n1}/{n2}",
            b.max_states,
            b.max_actions,
            h.n_states()
        )));
    }
    Ok(())
}

// Support masks: bit a set iff action a is played. For P1, 0 means stop.

fn mask_of(s: &[usize]) -> u32 {
    s.iter().fold(0, |m, &a| m | (1 << a))
}

fn p1_masks(pi1: &Strategy) -> Vec<u32> {
    (0..pi1.n_states())
        .map(|v| pi1.support(v).map_or(0, |s| mask_of(&s)))
        .collect()
}

fn p2_masks(pi2: &Strategy, n2: usize) -> Vec<u32> {
    (0..pi2.n_states())
        .map(|v| mask_of(&pi2.support_or_all(v, n2)))
        .collect()
}

fn strategy_of(owner: Player, masks: &[u32], n_actions: usize) -> Strategy {
    let mut s = Strategy::undefined(owner, masks.len());
    for (v, &m) in masks.iter().enumerate() {
        if m != 0 {
            let sup: Vec<usize> = (0..n_actions).filter(|&a| m & (1 << a) != 0).collect();
            s.set_uniform(v, &sup);
        }
    }
    s
}

fn successors(g: &ConcurrentGame, v: usize, m1: u32, m2: u32, out: &mut Vec<usize>) {
    out.clear();
    for a1 in 0..g.n_actions(Player::One) {
        if m1 & (1 << a1) == 0 {
            continue;
        }
        for a2 in 0..g.n_actions(Player::Two) {
            if m2 & (1 << a2) != 0 {
                out.extend(g.support(v, a1, a2));
            }
        }
    }
    out.sort_unstable();
    out.dedup();
}

/// Stop states reachable under the masks, or the states from which no stop
/// state can be reached if there are any.
fn terminal(g: &ConcurrentGame, m1: &[u32], m2: &[u32]) -> std::result::Result<Vec<usize>, Vec<usize>> {
    let n = g.n_states();
    let mut seen = vec![false; n];
    let mut order = vec![g.init()];
    seen[g.init()] = true;
    let mut edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut buf = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        i += 1;
        if m1[v] == 0 {
            continue;
        }
        successors(g, v, m1[v], m2[v], &mut buf);
        for &t in &buf {
            if !seen[t] {
                seen[t] = true;
                order.push(t);
            }
        }
        edges[v] = buf.clone();
    }
    let stops: Vec<usize> = order.iter().copied().filter(|&v| m1[v] == 0).collect();
    // backward closure from the stop states, within the reachable part
    let mut ok = vec![false; n];
    for &v in &stops {
        ok[v] = true;
    }
    let mut changed = true;
    while changed {
        changed = false;
        for &v in &order {
            if !ok[v] && edges[v].iter().any(|&t| ok[t]) {
                ok[v] = true;
                changed = true;
            }
        }
    }
    let stuck: Vec<usize> = order.iter().copied().filter(|&v| !ok[v]).collect();
    if stuck.is_empty() {
        let mut s = stops;
        s.sort_unstable();
        Ok(s)
    } else {
        let mut s = stuck;
        s.sort_unstable();
        Err(s)
    }
}

/// Terminal outcomes of a profile: the states where play can stop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutcomeSet {
    pub states: Vec<usize>,
    pub rank1: Vec<usize>,
    pub rank2: Vec<usize>,
}

impl OutcomeSet {
    fn new(h: &ProductGame, states: Vec<usize>) -> Self {
        let rank1 = states.iter().map(|&v| h.rank(Player::One, v)).collect();
        let rank2 = states.iter().map(|&v| h.rank(Player::Two, v)).collect();
        OutcomeSet { states, rank1, rank2 }
    }

    pub fn max_rank(&self, player: Player) -> usize {
        let r = match player {
            Player::One => &self.rank1,
            Player::Two => &self.rank2,
        };
        r.iter().copied().max().unwrap_or(0)
    }
}

/// Stop states reachable with positive probability under `(pi1, pi2)`.
/// Fails if play can get trapped away from every stop state.
pub fn outcome_set(h: &ProductGame, pi1: &Strategy, pi2: &Strategy) -> Result<OutcomeSet> {
    let g = h.game();
    let m1 = p1_masks(pi1);
    let m2 = p2_masks(pi2, g.n_actions(Player::Two));
    terminal(g, &m1, &m2)
        .map(|s| OutcomeSet::new(h, s))
        .map_err(Error::ImproperStrategy)
}

pub fn max_rank(h: &ProductGame, pi1: &Strategy, pi2: &Strategy, player: Player) -> Result<usize> {
    Ok(outcome_set(h, pi1, pi2)?.max_rank(player))
}

/// Dominance between two outcome sets under `player`'s preference: nothing
/// in `Min(b)` is strictly better than anything in `Min(a)`, and something
/// in `Min(a)` is strictly better than something in `Min(b)`.
pub fn dominates_outcomes(h: &ProductGame, player: Player, a: &[usize], b: &[usize]) -> bool {
    let gt = |u: usize, v: usize| h.strictly_prefers(player, u, v);
    let mins = |x: &[usize]| -> Vec<usize> { x.iter().copied().filter(|&u| !x.iter().any(|&w| gt(u, w))).collect() };
    let (ma, mb) = (mins(a), mins(b));
    let no_worse = mb.iter().all(|&y| ma.iter().all(|&x| !gt(y, x)));
    let better = ma.iter().any(|&x| mb.iter().any(|&y| gt(x, y)));
    no_worse && better
}

/// Whether profile `a` strictly dominates profile `b` for `player`.
pub fn strictly_dominates(
    h: &ProductGame,
    player: Player,
    a: (&Strategy, &Strategy),
    b: (&Strategy, &Strategy),
) -> Result<bool> {
    let oa = outcome_set(h, a.0, a.1)?;
    let ob = outcome_set(h, b.0, b.1)?;
    Ok(dominates_outcomes(h, player, &oa.states, &ob.states))
}

/// Every maximum-rank outcome is minimal in the outcome set under P1's
/// preference.
pub fn max_rank_outcomes_minimal(h: &ProductGame, omega: &OutcomeSet) -> bool {
    let k = omega.max_rank(Player::One);
    let x = &omega.states;
    let mins: Vec<usize> = x
        .iter()
        .copied()
        .filter(|&u| !x.iter().any(|&w| h.strictly_prefers(Player::One, u, w)))
        .collect();
    omega
        .states
        .iter()
        .zip(&omega.rank1)
        .filter(|&(_, &r)| r == k)
        .all(|(v, _)| mins.contains(v))
}

/// Lazily enumerates support strategies of `owner`, assigning a choice only
/// to states that become reachable. `other` is the fixed opponent. Choices
/// left unassigned are irrelevant to the outcome: they read as stop for P1
/// and as full support for P2. The callback returns `true` to abort.
fn enumerate_lazy(g: &ConcurrentGame, owner: Player, other: &[u32], f: &mut dyn FnMut(&[u32]) -> bool) -> bool {
    let n = g.n_states();
    let n_own = g.n_actions(owner);
    let first = if owner == Player::One { 0 } else { 1 };
    let mut assign: Vec<Option<u32>> = vec![None; n];
    rec(g, owner, other, first, (1u32 << n_own) - 1, &mut assign, f)
}

fn rec(
    g: &ConcurrentGame,
    owner: Player,
    other: &[u32],
    first: u32,
    last: u32,
    assign: &mut Vec<Option<u32>>,
    f: &mut dyn FnMut(&[u32]) -> bool,
) -> bool {
    let n = g.n_states();
    let full2 = (1u32 << g.n_actions(Player::Two)) - 1;
    let masks = |assign: &[Option<u32>]| -> (Vec<u32>, Vec<u32>) {
        match owner {
            Player::One => (assign.iter().map(|c| c.unwrap_or(0)).collect(), other.to_vec()),
            Player::Two => (other.to_vec(), assign.iter().map(|c| c.unwrap_or(full2)).collect()),
        }
    };
    // first reachable state that still needs a choice
    let (m1, m2) = masks(assign);
    let mut seen = vec![false; n];
    let mut queue = vec![g.init()];
    seen[g.init()] = true;
    let mut pending = None;
    let mut buf = Vec::new();
    let mut i = 0;
    while i < queue.len() {
        let v = queue[i];
        i += 1;
        if m1[v] == 0 && owner == Player::Two {
            continue;
        }
        if assign[v].is_none() {
            pending = Some(v);
            break;
        }
        if m1[v] == 0 {
            continue;
        }
        successors(g, v, m1[v], m2[v], &mut buf);
        for &t in &buf {
            if !seen[t] {
                seen[t] = true;
                queue.push(t);
            }
        }
    }
    match pending {
        None => {
            let own = match owner {
                Player::One => m1,
                Player::Two => m2,
            };
            f(&own)
        }
        Some(v) => {
            for c in first..=last {
                assign[v] = Some(c);
                if rec(g, owner, other, first, last, assign, f) {
                    assign[v] = None;
                    return true;
                }
            }
            assign[v] = None;
            false
        }
    }
}

/// All P2 support strategies over every state.
fn all_p2(n: usize, n2: usize, f: &mut dyn FnMut(&[u32]) -> bool) {
    let last = (1u32 << n2) - 1;
    let mut m = vec![1u32; n];
    loop {
        if f(&m) {
            return;
        }
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            if m[i] < last {
                m[i] += 1;
                break;
            }
            m[i] = 1;
            i += 1;
        }
    }
}

/// Outcome of a brute-force check, with a counterexample profile on failure.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub holds: bool,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone)]
pub struct Witness {
    pub reason: String,
    pub pi1: Strategy,
    pub pi2: Strategy,
    /// Outcomes of the candidate profile against this witness.
    pub outcomes: Vec<usize>,
    /// Outcomes of the deviating profile, if any.
    pub deviation_outcomes: Option<Vec<usize>>,
}

impl Witness {
    pub fn to_json(&self, g: &ConcurrentGame) -> Value {
        let names = |s: &[usize]| -> Vec<String> { s.iter().map(|&v| g.state_name(v).to_string()).collect() };
        json!({
            "reason": self.reason,
            "pi1": self.pi1.to_json(g),
            "pi2": self.pi2.to_json(g),
            "outcomes": names(&self.outcomes),
            "deviation_outcomes": self.deviation_outcomes.as_deref().map(names),
        })
    }
}

impl CheckOutcome {
    fn pass() -> Self {
        CheckOutcome {
            holds: true,
            witness: None,
        }
    }

    fn fail(w: Witness) -> Self {
        CheckOutcome {
            holds: false,
            witness: Some(w),
        }
    }
}

/// Brute-force non-domination check for a P1 strategy: against every P2
/// support strategy, no proper P1 strategy yields a strictly dominating
/// profile.
pub fn verify_ndaswin(h: &ProductGame, pi1: &Strategy, bounds: EnumBounds) -> Result<CheckOutcome> {
    check_bounds(h, bounds)?;
    let g = h.game();
    let (n1, n2) = (g.n_actions(Player::One), g.n_actions(Player::Two));
    let m1 = p1_masks(pi1);
    let mut result = CheckOutcome::pass();
    all_p2(h.n_states(), n2, &mut |m2| {
        let base = match terminal(g, &m1, m2) {
            Ok(s) => s,
            Err(stuck) => {
                result = CheckOutcome::fail(Witness {
                    reason: format!("strategy is not proper: play can be trapped in {stuck:?}"),
                    pi1: pi1.clone(),
                    pi2: strategy_of(Player::Two, m2, n2),
                    outcomes: Vec::new(),
                    deviation_outcomes: None,
                });
                return true;
            }
        };
        let m2 = m2.to_vec();
        let mut found = None;
        enumerate_lazy(g, Player::One, &m2, &mut |alt| {
            if let Ok(o) = terminal(g, alt, &m2) {
                if dominates_outcomes(h, Player::One, &o, &base) {
                    found = Some((alt.to_vec(), o));
                    return true;
                }
            }
            false
        });
        if let Some((alt, o)) = found {
            result = CheckOutcome::fail(Witness {
                reason: "a P1 deviation strictly dominates".into(),
                pi1: strategy_of(Player::One, &alt, n1),
                pi2: strategy_of(Player::Two, &m2, n2),
                outcomes: base,
                deviation_outcomes: Some(o),
            });
            return true;
        }
        false
    });
    Ok(result)
}

/// No player has a profitable deviation, where a deviation is profitable
/// when the deviating profile strictly dominates the candidate profile under
/// the deviator's preference.
pub fn check_nash(h: &ProductGame, pi1: &Strategy, pi2: &Strategy, bounds: EnumBounds) -> Result<CheckOutcome> {
    check_bounds(h, bounds)?;
    let g = h.game();
    let (n1, n2) = (g.n_actions(Player::One), g.n_actions(Player::Two));
    let m1 = p1_masks(pi1);
    let m2 = p2_masks(pi2, n2);
    let base = match terminal(g, &m1, &m2) {
        Ok(s) => s,
        Err(stuck) => {
            return Ok(CheckOutcome::fail(Witness {
                reason: format!("profile is not proper: play can be trapped in {stuck:?}"),
                pi1: pi1.clone(),
                pi2: pi2.clone(),
                outcomes: Vec::new(),
                deviation_outcomes: None,
            }))
        }
    };
    let mut found = None;
    enumerate_lazy(g, Player::One, &m2, &mut |alt| {
        if let Ok(o) = terminal(g, alt, &m2) {
            if dominates_outcomes(h, Player::One, &o, &base) {
                found = Some((Player::One, alt.to_vec(), o));
                return true;
            }
        }
        false
    });
    if found.is_none() {
        enumerate_lazy(g, Player::Two, &m1, &mut |alt| {
            if let Ok(o) = terminal(g, &m1, alt) {
                if dominates_outcomes(h, Player::Two, &o, &base) {
                    found = Some((Player::Two, alt.to_vec(), o));
                    return true;
                }
            }
            false
        });
    }
    Ok(match found {
        None => CheckOutcome::pass(),
        Some((p, alt, o)) => {
            let (w1, w2) = match p {
                Player::One => (strategy_of(Player::One, &alt, n1), pi2.clone()),
                Player::Two => (pi1.clone(), strategy_of(Player::Two, &alt, n2)),
            };
            CheckOutcome::fail(Witness {
                reason: format!("{p} has a profitable deviation"),
                pi1: w1,
                pi2: w2,
                outcomes: base,
                deviation_outcomes: Some(o),
            })
        }
    })
}

/// P2's rank guarantee against a fixed P1 strategy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OpponentGuarantee {
    /// `MaxRank2` under the given P2 strategy.
    pub observed: usize,
    /// Smallest `MaxRank2` over all P2 support strategies.
    pub best_response: usize,
    /// `k2max - k`.
    pub expected: isize,
}

impl OpponentGuarantee {
    pub fn holds(&self) -> bool {
        self.observed as isize == self.expected
    }
}

pub fn opponent_guarantee(
    h: &ProductGame,
    pi1: &Strategy,
    pi2: &Strategy,
    k: usize,
    bounds: EnumBounds,
) -> Result<OpponentGuarantee> {
    check_bounds(h, bounds)?;
    let g = h.game();
    let m1 = p1_masks(pi1);
    let observed = max_rank(h, pi1, pi2, Player::Two)?;
    let mut best = usize::MAX;
    enumerate_lazy(g, Player::Two, &m1, &mut |alt| {
        if let Ok(o) = terminal(g, &m1, alt) {
            let r = o.iter().map(|&v| h.rank(Player::Two, v)).max().unwrap_or(0);
            best = best.min(r);
        }
        false
    });
    Ok(OpponentGuarantee {
        observed,
        best_response: best,
        expected: h.kmax(Player::Two) as isize - k as isize,
    })
}

/// `rank1 + rank2` is the same constant `k1max = k2max` everywhere.
pub fn constant_sum_holds(r1: &RankAssignment, r2: &RankAssignment, k1max: usize, k2max: usize) -> bool {
    k1max == k2max && r1.len() == r2.len() && (0..r1.len()).all(|v| r1.rank(v) + r2.rank(v) == k1max)
}

pub fn constant_sum_check(h: &ProductGame) -> bool {
    constant_sum_holds(
        h.ranks(Player::One),
        h.ranks(Player::Two),
        h.kmax(Player::One),
        h.kmax(Player::Two),
    )
}

/// First state where the identity fails, as `(state, rank1, rank2)`.
pub fn constant_sum_violation(h: &ProductGame) -> Option<(usize, usize, usize)> {
    (0..h.n_states())
        .map(|v| (v, h.rank(Player::One, v), h.rank(Player::Two, v)))
        .find(|&(_, a, b)| a + b != h.kmax(Player::One) || h.kmax(Player::One) != h.kmax(Player::Two))
}

/// Empirical distribution of P1 ranks at the stop state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutcomeEstimate {
    pub runs: usize,
    pub histogram: BTreeMap<usize, usize>,
    pub non_terminated: usize,
}

impl OutcomeEstimate {
    pub fn max_observed(&self) -> Option<usize> {
        self.histogram.keys().next_back().copied()
    }

    /// Runs that stopped at rank at most `k`.
    pub fn at_most(&self, k: usize) -> usize {
        self.histogram.range(..=k).map(|(_, c)| c).sum()
    }
}

pub fn estimate_outcomes(
    h: &ProductGame,
    pi1: &Strategy,
    pi2: &Strategy,
    runs: usize,
    seed: u64,
    horizon: usize,
) -> OutcomeEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut est = OutcomeEstimate {
        runs,
        histogram: BTreeMap::new(),
        non_terminated: 0,
    };
    for _ in 0..runs {
        let (path, why) = rollout(h.game(), pi1, pi2, &mut rng, horizon);
        match why {
            StopReason::StrategyStopped => {
                *est.histogram.entry(h.rank(Player::One, path.last())).or_default() += 1;
            }
            StopReason::HorizonCut => est.non_terminated += 1,
        }
    }
    est
}

/// `{check, instance, result, witness}` record.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub check: String,
    pub instance: String,
    pub result: bool,
    pub witness: Value,
}

impl Report {
    pub fn new(check: &str, instance: &str, result: bool, witness: Value) -> Self {
        Report {
            check: check.into(),
            instance: instance.into(),
            result,
            witness,
        }
    }

    pub fn from_check(check: &str, instance: &str, c: &CheckOutcome, g: &ConcurrentGame) -> Self {
        let w = c.witness.as_ref().map_or(Value::Null, |w| w.to_json(g));
        Report::new(check, instance, c.holds, w)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }
}
