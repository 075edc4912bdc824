//! Concurrent stochastic games, memoryless strategies, paths and rollouts.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_rational::Ratio;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ltlf::{Alphabet, Letter};

/// Exact transition probability.
pub type Prob = Ratio<i64>;

/// Parses `"0.8"`, `"4/5"` or `"1"`.
pub fn parse_prob(s: &str) -> Result<Prob> {
    let s = s.trim();
    let bad = || Error::Invalid(format!("bad probability `{s}`"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Prob::new(n, d));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 15 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let int: i64 = if int.is_empty() {
        0
    } else {
        int.parse().map_err(|_| bad())?
    };
    let den = 10i64.pow(frac.len() as u32);
    let num: i64 = if frac.is_empty() {
        0
    } else {
        frac.parse().map_err(|_| bad())?
    };
    Ok(Prob::new(int * den + num, den))
}

pub fn prob_to_f64(p: Prob) -> f64 {
    *p.numer() as f64 / *p.denom() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Player::One => 1,
            Player::Two => 2,
        }
    }

    pub fn from_number(n: u8) -> Result<Player> {
        match n {
            1 => Ok(Player::One),
            2 => Ok(Player::Two),
            _ => Err(Error::Invalid(format!("player must be 1 or 2, got {n}"))),
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.number())
    }
}

/// Successor distribution: `(state, probability)` pairs.
pub type Dist = Vec<(usize, Prob)>;

/// Two-player concurrent stochastic game with labelled states.
///
/// Transitions are stored densely by `(state, a1, a2)`; an empty entry is an
/// undefined transition and is reported by [`ConcurrentGame::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConcurrentGame {
    state_names: Vec<String>,
    ap: Alphabet,
    labels: Vec<Letter>,
    actions1: Vec<String>,
    actions2: Vec<String>,
    init: usize,
    trans: Vec<Dist>,
}

impl ConcurrentGame {
    /// Creates a game with no transitions.
    pub fn new(
        state_names: Vec<String>,
        ap: Alphabet,
        labels: Vec<Letter>,
        actions1: Vec<String>,
        actions2: Vec<String>,
        init: usize,
    ) -> Self {
        let n = state_names.len() * actions1.len() * actions2.len();
        ConcurrentGame {
            state_names,
            ap,
            labels,
            actions1,
            actions2,
            init,
            trans: vec![Vec::new(); n],
        }
    }

    fn slot(&self, s: usize, a1: usize, a2: usize) -> usize {
        (s * self.actions1.len() + a1) * self.actions2.len() + a2
    }

    pub fn set_transition(&mut self, s: usize, a1: usize, a2: usize, dist: Dist) {
        let k = self.slot(s, a1, a2);
        self.trans[k] = dist;
    }

    pub fn n_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_name(&self, s: usize) -> &str {
        &self.state_names[s]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.state_names.iter().position(|n| n == name)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.ap
    }

    pub fn label(&self, s: usize) -> Letter {
        self.labels[s]
    }

    pub fn actions(&self, p: Player) -> &[String] {
        match p {
            Player::One => &self.actions1,
            Player::Two => &self.actions2,
        }
    }

    pub fn n_actions(&self, p: Player) -> usize {
        self.actions(p).len()
    }

    pub fn init(&self) -> usize {
        self.init
    }

    pub fn dist(&self, s: usize, a1: usize, a2: usize) -> &Dist {
        &self.trans[self.slot(s, a1, a2)]
    }

    /// Successors with positive probability.
    pub fn support(&self, s: usize, a1: usize, a2: usize) -> impl Iterator<Item = usize> + '_ {
        self.dist(s, a1, a2)
            .iter()
            .filter(|(_, p)| *p > Prob::from_integer(0))
            .map(|(t, _)| *t)
    }

    /// Distribution indexed by the given player's and the opponent's action.
    pub fn dist_for(&self, p: Player, s: usize, mine: usize, theirs: usize) -> &Dist {
        match p {
            Player::One => self.dist(s, mine, theirs),
            Player::Two => self.dist(s, theirs, mine),
        }
    }

    /// Every invariant violation, one line each. Empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.n_states();
        if n == 0 {
            out.push("game has no states".into());
        }
        if self.actions1.is_empty() || self.actions2.is_empty() {
            out.push("each player needs at least one action".into());
        }
        if self.init >= n && n > 0 {
            out.push(format!("initial state {} undeclared", self.init));
        }
        if self.labels.len() != n {
            out.push(format!("{} labels for {} states", self.labels.len(), n));
        }
        for (s, l) in self.labels.iter().enumerate() {
            if !self.ap.contains_letter(*l) {
                out.push(format!("label of state {s} uses undeclared propositions"));
            }
        }
        let zero = Prob::from_integer(0);
        let one = Prob::from_integer(1);
        for s in 0..n {
            for a1 in 0..self.actions1.len() {
                for a2 in 0..self.actions2.len() {
                    let at = || {
                        format!(
                            "({}, {}, {})",
                            self.state_names[s], self.actions1[a1], self.actions2[a2]
                        )
                    };
                    let d = self.dist(s, a1, a2);
                    if d.is_empty() {
                        out.push(format!("{}: missing transition", at()));
                        continue;
                    }
                    let mut sum = zero;
                    for &(t, p) in d {
                        if t >= n {
                            out.push(format!("{}: successor {t} is not a declared state", at()));
                        }
                        if p < zero {
                            out.push(format!("{}: negative probability {p}", at()));
                        }
                        sum += p;
                    }
                    if sum != one {
                        out.push(format!("{}: probabilities sum to {sum}", at()));
                    }
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let name = |s: usize| self.state_names[s].clone();
        let labels: BTreeMap<String, Vec<String>> = (0..self.n_states())
            .map(|s| (name(s), self.ap.letter_props(self.labels[s])))
            .collect();
        let mut transitions = Vec::new();
        for s in 0..self.n_states() {
            for a1 in 0..self.actions1.len() {
                for a2 in 0..self.actions2.len() {
                    let dist: serde_json::Map<String, serde_json::Value> = self
                        .dist(s, a1, a2)
                        .iter()
                        .map(|(t, p)| (name(*t), serde_json::Value::String(p.to_string())))
                        .collect();
                    transitions.push(serde_json::json!({
                        "s": name(s),
                        "a1": self.actions1[a1],
                        "a2": self.actions2[a2],
                        "dist": dist,
                    }));
                }
            }
        }
        serde_json::json!({
            "states": self.state_names,
            "ap": self.ap.props(),
            "labels": labels,
            "actions1": self.actions1,
            "actions2": self.actions2,
            "init": name(self.init),
            "transitions": transitions,
        })
    }

    /// Loads the JSON game format. Unknown names are reported together.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: GameJson = serde_json::from_str(text)?;
        let mut errors = Vec::new();
        let state_ix: HashMap<&str, usize> = raw.states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let a1_ix: HashMap<&str, usize> = raw.actions1.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let a2_ix: HashMap<&str, usize> = raw.actions2.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let ap = Alphabet::new(raw.ap.iter().cloned());
        let mut labels = vec![Letter(0); raw.states.len()];
        for (s, props) in &raw.labels {
            match state_ix.get(s.as_str()) {
                Some(&i) => match ap.letter(props) {
                    Ok(l) => labels[i] = l,
                    Err(e) => errors.push(format!("label of {s}: {e}")),
                },
                None => errors.push(format!("label for undeclared state `{s}`")),
            }
        }
        let init = match state_ix.get(raw.init.as_str()) {
            Some(&i) => i,
            None => {
                errors.push(format!("undeclared initial state `{}`", raw.init));
                0
            }
        };
        let mut g = ConcurrentGame::new(
            raw.states.clone(),
            ap,
            labels,
            raw.actions1.clone(),
            raw.actions2.clone(),
            init,
        );
        for t in &raw.transitions {
            let s = state_ix.get(t.s.as_str());
            let a1 = a1_ix.get(t.a1.as_str());
            let a2 = a2_ix.get(t.a2.as_str());
            let (Some(&s), Some(&a1), Some(&a2)) = (s, a1, a2) else {
                errors.push(format!(
                    "transition ({}, {}, {}) uses undeclared names",
                    t.s, t.a1, t.a2
                ));
                continue;
            };
            let mut dist = Vec::new();
            for (target, p) in &t.dist {
                let Some(&ti) = state_ix.get(target.as_str()) else {
                    errors.push(format!(
                        "transition ({}, {}, {}) targets undeclared `{target}`",
                        t.s, t.a1, t.a2
                    ));
                    continue;
                };
                match p.as_prob() {
                    Ok(p) => dist.push((ti, p)),
                    Err(e) => errors.push(e.to_string()),
                }
            }
            g.set_transition(s, a1, a2, dist);
        }
        if !errors.is_empty() {
            return Err(Error::Invalid(errors.join("; ")));
        }
        Ok(g)
    }
}

#[derive(Deserialize)]
struct GameJson {
    states: Vec<String>,
    ap: Vec<String>,
    #[serde(default)]
    labels: BTreeMap<String, Vec<String>>,
    actions1: Vec<String>,
    actions2: Vec<String>,
    init: String,
    transitions: Vec<TransitionJson>,
}

#[derive(Deserialize)]
struct TransitionJson {
    s: String,
    a1: String,
    a2: String,
    dist: BTreeMap<String, ProbJson>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ProbJson {
    Text(String),
    Number(f64),
}

impl ProbJson {
    fn as_prob(&self) -> Result<Prob> {
        match self {
            ProbJson::Text(s) => parse_prob(s),
            ProbJson::Number(x) => parse_prob(&x.to_string()),
        }
    }
}

/// Memoryless randomized strategy. `None` at a state means the owner does
/// not act there: for P1 the play stops, for P2 every action stays possible.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    owner: Player,
    entries: Vec<Option<Vec<(usize, f64)>>>,
}

impl Strategy {
    pub fn undefined(owner: Player, n_states: usize) -> Self {
        Strategy {
            owner,
            entries: vec![None; n_states],
        }
    }

    pub fn owner(&self) -> Player {
        self.owner
    }

    pub fn n_states(&self) -> usize {
        self.entries.len()
    }

    /// Sets a distribution over actions. Zero-weight actions are dropped.
    pub fn set(&mut self, s: usize, dist: Vec<(usize, f64)>) {
        let dist: Vec<(usize, f64)> = dist.into_iter().filter(|(_, p)| *p > 0.0).collect();
        assert!(!dist.is_empty(), "strategy entry needs nonempty support");
        self.entries[s] = Some(dist);
    }

    pub fn set_uniform(&mut self, s: usize, support: &[usize]) {
        let p = 1.0 / support.len() as f64;
        self.set(s, support.iter().map(|&a| (a, p)).collect());
    }

    pub fn clear(&mut self, s: usize) {
        self.entries[s] = None;
    }

    pub fn get(&self, s: usize) -> Option<&[(usize, f64)]> {
        self.entries[s].as_deref()
    }

    pub fn is_defined(&self, s: usize) -> bool {
        self.entries[s].is_some()
    }

    /// Support at `s`, or `None` when undefined.
    pub fn support(&self, s: usize) -> Option<Vec<usize>> {
        self.entries[s].as_ref().map(|d| d.iter().map(|(a, _)| *a).collect())
    }

    /// Support with the undefined case resolved to all `n_actions` actions.
    pub fn support_or_all(&self, s: usize, n_actions: usize) -> Vec<usize> {
        self.support(s).unwrap_or_else(|| (0..n_actions).collect())
    }

    pub fn defined_states(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.entries.len()).filter(|&s| self.entries[s].is_some())
    }

    /// Per-entry checks: supports nonempty, actions in range, sums to 1.
    pub fn validate(&self, g: &ConcurrentGame) -> Vec<String> {
        let mut out = Vec::new();
        if self.entries.len() != g.n_states() {
            out.push(format!(
                "strategy covers {} states, game has {}",
                self.entries.len(),
                g.n_states()
            ));
        }
        let na = g.n_actions(self.owner);
        for (s, e) in self.entries.iter().enumerate() {
            let Some(d) = e else { continue };
            if d.is_empty() {
                out.push(format!("state {s}: empty support"));
            }
            if d.iter().any(|(a, _)| *a >= na) {
                out.push(format!("state {s}: action out of range"));
            }
            let sum: f64 = d.iter().map(|(_, p)| p).sum();
            if (sum - 1.0).abs() > 1e-9 {
                out.push(format!("state {s}: action probabilities sum to {sum}"));
            }
        }
        out
    }

    pub fn to_json(&self, g: &ConcurrentGame) -> serde_json::Value {
        let names = g.actions(self.owner);
        let entries: Vec<serde_json::Value> = self
            .defined_states()
            .map(|s| {
                let d = self.get(s).unwrap();
                serde_json::json!({
                    "state": g.state_name(s),
                    "support": d.iter().map(|(a, _)| names[*a].clone()).collect::<Vec<_>>(),
                    "dist": d.iter().map(|(_, p)| *p).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({
            "player": self.owner.number(),
            "entries": entries,
        })
    }

    pub fn from_json(v: &serde_json::Value, g: &ConcurrentGame) -> Result<Self> {
        let raw: StrategyJson = serde_json::from_value(v.clone())?;
        let owner = Player::from_number(raw.player)?;
        let names = g.actions(owner);
        let mut st = Strategy::undefined(owner, g.n_states());
        for e in raw.entries {
            let s = g
                .state_index(&e.state)
                .ok_or_else(|| Error::Invalid(format!("unknown state `{}`", e.state)))?;
            if e.support.len() != e.dist.len() || e.support.is_empty() {
                return Err(Error::Invalid(format!("bad entry for `{}`", e.state)));
            }
            let mut d = Vec::new();
            for (a, p) in e.support.iter().zip(&e.dist) {
                let ai = names
                    .iter()
                    .position(|n| n == a)
                    .ok_or_else(|| Error::Invalid(format!("unknown action `{a}`")))?;
                d.push((ai, *p));
            }
            st.set(s, d);
        }
        let problems = st.validate(g);
        if !problems.is_empty() {
            return Err(Error::Invalid(problems.join("; ")));
        }
        Ok(st)
    }
}

#[derive(Deserialize)]
struct StrategyJson {
    player: u8,
    entries: Vec<StrategyEntryJson>,
}

#[derive(Deserialize)]
struct StrategyEntryJson {
    state: String,
    support: Vec<String>,
    dist: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    states: Vec<usize>,
}

impl Path {
    pub fn new(states: Vec<usize>) -> Self {
        assert!(!states.is_empty(), "paths are nonempty");
        Path { states }
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn last(&self) -> usize {
        *self.states.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn trace(&self, g: &ConcurrentGame) -> Vec<Letter> {
        self.states.iter().map(|&s| g.label(s)).collect()
    }
}

/// Whether every step of `p` is possible under the strategies' supports.
pub fn is_consistent(p: &Path, pi1: &Strategy, pi2: &Strategy, g: &ConcurrentGame) -> bool {
    p.states().windows(2).all(|w| {
        let (s, t) = (w[0], w[1]);
        let Some(s1) = pi1.support(s) else {
            return false;
        };
        let s2 = pi2.support_or_all(s, g.n_actions(Player::Two));
        s1.iter()
            .any(|&a1| s2.iter().any(|&a2| g.support(s, a1, a2).any(|x| x == t)))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    StrategyStopped,
    HorizonCut,
}

fn sample_action<R: Rng>(rng: &mut R, strat: &Strategy, s: usize, n_actions: usize) -> usize {
    match strat.get(s) {
        Some(d) if d.len() == 1 => d[0].0,
        Some(d) => {
            let w = WeightedIndex::new(d.iter().map(|(_, p)| *p)).expect("positive weights");
            d[w.sample(rng)].0
        }
        None => rng.gen_range(0..n_actions),
    }
}

/// Seeded rollout. Stops when P1's strategy is undefined at the current
/// state or after `max_steps` moves.
pub fn sample_path(
    g: &ConcurrentGame,
    pi1: &Strategy,
    pi2: &Strategy,
    seed: u64,
    max_steps: usize,
) -> (Path, StopReason) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rollout(g, pi1, pi2, &mut rng, max_steps)
}

pub(crate) fn rollout<R: Rng>(
    g: &ConcurrentGame,
    pi1: &Strategy,
    pi2: &Strategy,
    rng: &mut R,
    max_steps: usize,
) -> (Path, StopReason) {
    let mut s = g.init();
    let mut states = vec![s];
    loop {
        if !pi1.is_defined(s) {
            return (Path::new(states), StopReason::StrategyStopped);
        }
        if states.len() > max_steps {
            return (Path::new(states), StopReason::HorizonCut);
        }
        let a1 = sample_action(rng, pi1, s, g.n_actions(Player::One));
        let a2 = sample_action(rng, pi2, s, g.n_actions(Player::Two));
        let d = g.dist(s, a1, a2);
        let w = WeightedIndex::new(d.iter().map(|(_, p)| prob_to_f64(*p))).expect("valid distribution");
        s = d[w.sample(rng)].0;
        states.push(s);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// s0 --(any)--> s1 (absorbing).
    fn chain() -> ConcurrentGame {
        let mut g = ConcurrentGame::new(
            vec!["s0".into(), "s1".into()],
            Alphabet::new(["p"]),
            vec![Letter(0), Letter(1)],
            vec!["a".into()],
            vec!["b".into()],
            0,
        );
        g.set_transition(0, 0, 0, vec![(1, Prob::from_integer(1))]);
        g.set_transition(1, 0, 0, vec![(1, Prob::from_integer(1))]);
        g
    }

    #[test]
    fn probabilities_parse() {
        assert_eq!(parse_prob("0.8").unwrap(), Prob::new(4, 5));
        assert_eq!(parse_prob("4/5").unwrap(), Prob::new(4, 5));
        assert_eq!(parse_prob("1").unwrap(), Prob::from_integer(1));
        assert!(parse_prob("x").is_err());
        assert!(parse_prob("1/0").is_err());
    }

    #[test]
    fn validation() {
        assert!(chain().validate().is_empty());
        let mut g = chain();
        g.set_transition(0, 0, 0, vec![(1, Prob::new(9, 10))]);
        let v = g.validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("(s0, a, b)"), "{v:?}");
        let mut g = chain();
        g.set_transition(0, 0, 0, vec![(5, Prob::from_integer(1))]);
        assert!(g.validate().iter().any(|m| m.contains("not a declared state")));
    }

    #[test]
    fn json_round_trip() {
        let g = chain();
        let text = g.to_json().to_string();
        assert_eq!(ConcurrentGame::from_json_str(&text).unwrap(), g);
        let bad = text.replace("\"s1\":\"1\"", "\"s9\":\"1\"");
        assert!(ConcurrentGame::from_json_str(&bad).is_err());
    }

    #[test]
    fn consistency_and_sampling() {
        let g = chain();
        let mut pi1 = Strategy::undefined(Player::One, 2);
        pi1.set_uniform(0, &[0]);
        let pi2 = Strategy::undefined(Player::Two, 2);
        assert!(is_consistent(&Path::new(vec![0]), &pi1, &pi2, &g));
        let (p, why) = sample_path(&g, &pi1, &pi2, 7, 10);
        assert_eq!(p.states(), &[0, 1]);
        assert_eq!(why, StopReason::StrategyStopped);
        assert!(is_consistent(&p, &pi1, &pi2, &g));
        assert!(!is_consistent(&Path::new(vec![0, 0]), &pi1, &pi2, &g));
        // stepping from a stop state is inconsistent
        assert!(!is_consistent(&Path::new(vec![0, 1, 1]), &pi1, &pi2, &g));
    }

    #[test]
    fn horizon_cut() {
        let g = chain();
        let mut pi1 = Strategy::undefined(Player::One, 2);
        pi1.set_uniform(0, &[0]);
        pi1.set_uniform(1, &[0]);
        let pi2 = Strategy::undefined(Player::Two, 2);
        let (p, why) = sample_path(&g, &pi1, &pi2, 0, 3);
        assert_eq!(p.len(), 4);
        assert_eq!(why, StopReason::HorizonCut);
    }
}
