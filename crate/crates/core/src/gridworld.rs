//! Two-drone delivery gridworld.
//!
//! Drone A (player 1) collects packages at pickup cells and drops them at
//! their destinations; drone B (player 2) tries to stop it. Each round both
//! drones move at once. A move reaches the intended cell with probability
//! `1 - slip` and otherwise slides to one of the two cells lateral to the
//! intended direction, half the slip mass each. Mass aimed at a no-go cell
//! or off the grid stays put. `attack` keeps a drone in place; if B attacks
//! and A ends the round in B's cell, A is disabled for good.
//!
//! Cells are `(row, col)` with row 0 at the top; `N` decreases the row.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::game::{parse_prob, ConcurrentGame, Player, Prob};
use crate::ltlf::{Alphabet, Letter};
use crate::preference::{build_preference_automaton, PrefSpec, PreferenceAutomaton};
use crate::product::build_product_bounded;
use crate::solver::ndaswin;

pub type Cell = (usize, usize);

pub const DEFAULT_GRID_STATE_BOUND: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct GridScenario {
    pub width: usize,
    pub height: usize,
    pub nogo: Vec<Cell>,
    pub pickups: Vec<Cell>,
    pub dests: Vec<Cell>,
    pub b_start: Cell,
    /// Candidate starts for A; `None` means every valid cell.
    pub a_starts: Option<Vec<Cell>>,
    pub slip: Prob,
    pub horizon: usize,
    /// Whether B has the `attack` action at all.
    pub b_attack: bool,
}

#[derive(Deserialize)]
struct ScenarioJson {
    width: usize,
    height: usize,
    #[serde(default)]
    nogo: Vec<[usize; 2]>,
    pickups: BTreeMap<String, [usize; 2]>,
    dests: BTreeMap<String, [usize; 2]>,
    b_start: [usize; 2],
    #[serde(default)]
    a_starts: Option<Vec<[usize; 2]>>,
    #[serde(default)]
    slip: Option<serde_json::Value>,
    #[serde(default)]
    horizon: Option<usize>,
    #[serde(default)]
    b_attack: Option<bool>,
}

fn cell(c: [usize; 2]) -> Cell {
    (c[0], c[1])
}

/// `p1, p2, ...` keyed map to a list ordered by the numeric suffix.
fn numbered(map: BTreeMap<String, [usize; 2]>, prefix: &str) -> Result<Vec<Cell>> {
    let mut out: Vec<(usize, Cell)> = Vec::new();
    for (k, v) in map {
        let i: usize = k
            .strip_prefix(prefix)
            .and_then(|s| s.parse().ok())
            .filter(|&i| i >= 1)
            .ok_or_else(|| Error::Invalid(format!("expected key {prefix}<n>, got {k:?}")))?;
        out.push((i, cell(v)));
    }
    out.sort();
    for (j, &(i, _)) in out.iter().enumerate() {
        if i != j + 1 {
            return Err(Error::Invalid(format!(
                "{prefix} keys must be numbered 1..{}",
                out.len()
            )));
        }
    }
    Ok(out.into_iter().map(|(_, c)| c).collect())
}

impl GridScenario {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let j: ScenarioJson = serde_json::from_str(text)?;
        let slip = match j.slip {
            None => Prob::new(1, 5),
            Some(serde_json::Value::String(s)) => parse_prob(&s)?,
            Some(serde_json::Value::Number(n)) => parse_prob(&n.to_string())?,
            Some(other) => return Err(Error::Invalid(format!("bad slip value {other}"))),
        };
        let sc = GridScenario {
            width: j.width,
            height: j.height,
            nogo: j.nogo.into_iter().map(cell).collect(),
            pickups: numbered(j.pickups, "p")?,
            dests: numbered(j.dests, "d")?,
            b_start: cell(j.b_start),
            a_starts: j.a_starts.map(|v| v.into_iter().map(cell).collect()),
            slip,
            horizon: j.horizon.unwrap_or(10),
            b_attack: j.b_attack.unwrap_or(true),
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Invalid(m));
        if self.width == 0 || self.height == 0 {
            return bad("grid must be nonempty".into());
        }
        if self.slip < Prob::from_integer(0) || self.slip >= Prob::from_integer(1) {
            return bad(format!("slip must lie in [0, 1), got {}", self.slip));
        }
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if self.pickups.len() != self.dests.len() || self.pickups.is_empty() {
            return bad("need one destination per pickup and at least one package".into());
        }
        if self.pickups.len() > 3 {
            return bad("at most 3 packages".into());
        }
        for &c in &self.nogo {
            if !self.in_grid(c) {
                return bad(format!("no-go cell {c:?} outside the grid"));
            }
        }
        let mut sites: Vec<Cell> = self.pickups.iter().chain(&self.dests).copied().collect();
        sites.push(self.b_start);
        for &c in &sites {
            if !self.is_free(c) {
                return bad(format!("cell {c:?} is off the grid or no-go"));
            }
        }
        let mut uniq = sites.clone();
        uniq.sort();
        uniq.dedup();
        if uniq.len() != sites.len() {
            return bad("pickups, destinations and B's start must be distinct cells".into());
        }
        if let Some(starts) = &self.a_starts {
            for &c in starts {
                if !self.is_valid_start(c) {
                    return bad(format!("A start {c:?} is not a valid cell"));
                }
            }
        }
        Ok(())
    }

    fn in_grid(&self, (r, c): Cell) -> bool {
        r < self.height && c < self.width
    }

    /// On the grid and not no-go.
    pub fn is_free(&self, c: Cell) -> bool {
        self.in_grid(c) && !self.nogo.contains(&c)
    }

    /// Free and not a pickup, destination or B's start.
    pub fn is_valid_start(&self, c: Cell) -> bool {
        self.is_free(c) && c != self.b_start && !self.pickups.contains(&c) && !self.dests.contains(&c)
    }

    pub fn start_cells(&self) -> Vec<Cell> {
        match &self.a_starts {
            Some(v) => v.clone(),
            None => (0..self.height)
                .flat_map(|r| (0..self.width).map(move |c| (r, c)))
                .filter(|&c| self.is_valid_start(c))
                .collect(),
        }
    }

    /// `d1 .. dm, o`.
    pub fn alphabet(&self) -> Alphabet {
        let mut props: Vec<String> = (1..=self.pickups.len()).map(|i| format!("d{i}")).collect();
        props.push("o".into());
        Alphabet::new(props)
    }

    fn step(&self, (r, c): Cell, dir: Dir) -> Option<Cell> {
        let (dr, dc) = dir.delta();
        let nr = r.checked_add_signed(dr)?;
        let nc = c.checked_add_signed(dc)?;
        Some((nr, nc)).filter(|&n| self.is_free(n))
    }

    /// Position distribution for one drone.
    pub fn move_dist(&self, from: Cell, action: Action) -> Vec<(Cell, Prob)> {
        let Action::Move(dir) = action else {
            return vec![(from, Prob::from_integer(1))];
        };
        let half = self.slip / 2;
        let mut out: Vec<(Cell, Prob)> = Vec::new();
        let mut add = |c: Cell, p: Prob| {
            if p == Prob::from_integer(0) {
                return;
            }
            match out.iter_mut().find(|(x, _)| *x == c) {
                Some(e) => e.1 += p,
                None => out.push((c, p)),
            }
        };
        add(self.step(from, dir).unwrap_or(from), Prob::from_integer(1) - self.slip);
        for lat in dir.laterals() {
            add(self.step(from, lat).unwrap_or(from), half);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    N,
    E,
    S,
    W,
}

impl Dir {
    fn delta(self) -> (isize, isize) {
        match self {
            Dir::N => (-1, 0),
            Dir::E => (0, 1),
            Dir::S => (1, 0),
            Dir::W => (0, -1),
        }
    }

    fn laterals(self) -> [Dir; 2] {
        match self {
            Dir::N | Dir::S => [Dir::E, Dir::W],
            Dir::E | Dir::W => [Dir::N, Dir::S],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Move(Dir),
    Attack,
}

impl Action {
    fn name(self) -> &'static str {
        match self {
            Action::Move(Dir::N) => "N",
            Action::Move(Dir::E) => "E",
            Action::Move(Dir::S) => "S",
            Action::Move(Dir::W) => "W",
            Action::Attack => "attack",
        }
    }
}

const MOVES: [Action; 4] = [
    Action::Move(Dir::N),
    Action::Move(Dir::E),
    Action::Move(Dir::S),
    Action::Move(Dir::W),
];

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JointState {
    pub a: Cell,
    pub b: Cell,
    /// Per package: 0 at source, 1 carried by A, 2 delivered.
    pub status: Vec<u8>,
    pub round: usize,
    pub disabled: bool,
}

impl JointState {
    fn name(&self) -> String {
        let pk: String = self.status.iter().map(|s| char::from(b'0' + s)).collect();
        format!(
            "A{},{}|B{},{}|{pk}|t{}{}",
            self.a.0,
            self.a.1,
            self.b.0,
            self.b.1,
            self.round,
            if self.disabled { "|x" } else { "" }
        )
    }

    fn absorbing(&self, horizon: usize) -> bool {
        self.disabled || self.round >= horizon
    }
}

/// The scenario as a concurrent game with A starting at `a_start`.
pub fn compile_scenario(sc: &GridScenario, a_start: Cell) -> Result<ConcurrentGame> {
    compile_scenario_bounded(sc, a_start, DEFAULT_GRID_STATE_BOUND)
}

pub fn compile_scenario_bounded(sc: &GridScenario, a_start: Cell, max_states: usize) -> Result<ConcurrentGame> {
    sc.validate()?;
    if !sc.is_valid_start(a_start) {
        return Err(Error::Invalid(format!("A start {a_start:?} is not a valid cell")));
    }
    let acts1: Vec<Action> = MOVES.iter().copied().chain([Action::Attack]).collect();
    let acts2: Vec<Action> = if sc.b_attack { acts1.clone() } else { MOVES.to_vec() };
    let ap = sc.alphabet();
    let m = sc.pickups.len();
    let o = ap.index_of("o").expect("o declared");

    let s0 = JointState {
        a: a_start,
        b: sc.b_start,
        status: vec![0; m],
        round: 0,
        disabled: false,
    };
    let mut index = HashMap::from([(s0.clone(), 0usize)]);
    let mut states = vec![s0];
    let mut rows: Vec<Vec<Vec<(usize, Prob)>>> = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let st = states[i].clone();
        let mut row = Vec::with_capacity(acts1.len() * acts2.len());
        for &x in &acts1 {
            for &y in &acts2 {
                let mut dist: Vec<(usize, Prob)> = Vec::new();
                let outcomes: Vec<(JointState, Prob)> = if st.absorbing(sc.horizon) {
                    vec![(st.clone(), Prob::from_integer(1))]
                } else {
                    successors(sc, &st, x, y)
                };
                for (t, p) in outcomes {
                    let id = match index.get(&t) {
                        Some(&id) => id,
                        None => {
                            if states.len() >= max_states {
                                return Err(Error::StateBound(max_states));
                            }
                            index.insert(t.clone(), states.len());
                            states.push(t);
                            states.len() - 1
                        }
                    };
                    match dist.iter_mut().find(|(d, _)| *d == id) {
                        Some(e) => e.1 += p,
                        None => dist.push((id, p)),
                    }
                }
                row.push(dist);
            }
        }
        rows.push(row);
        i += 1;
    }

    let labels = states
        .iter()
        .map(|s| {
            let mut bits = 0u32;
            for (k, &st) in s.status.iter().enumerate() {
                if st == 2 {
                    bits |= 1 << ap.index_of(&format!("d{}", k + 1)).expect("declared");
                }
            }
            if s.disabled {
                bits |= 1 << o;
            }
            Letter(bits)
        })
        .collect();
    let mut g = ConcurrentGame::new(
        states.iter().map(JointState::name).collect(),
        ap,
        labels,
        acts1.iter().map(|a| a.name().to_string()).collect(),
        acts2.iter().map(|a| a.name().to_string()).collect(),
        0,
    );
    let n2 = acts2.len();
    for (v, row) in rows.into_iter().enumerate() {
        for (k, dist) in row.into_iter().enumerate() {
            g.set_transition(v, k / n2, k % n2, dist);
        }
    }
    Ok(g)
}

fn successors(sc: &GridScenario, st: &JointState, x: Action, y: Action) -> Vec<(JointState, Prob)> {
    let mut out = Vec::new();
    for (a, pa) in sc.move_dist(st.a, x) {
        for (b, pb) in sc.move_dist(st.b, y) {
            let mut t = JointState {
                a,
                b,
                status: st.status.clone(),
                round: st.round + 1,
                disabled: false,
            };
            if y == Action::Attack && a == b {
                t.disabled = true;
            } else {
                for k in 0..t.status.len() {
                    if t.status[k] == 0 && a == sc.pickups[k] {
                        t.status[k] = 1;
                    } else if t.status[k] == 1 && a == sc.dests[k] {
                        t.status[k] = 2;
                    }
                }
            }
            out.push((t, pa * pb));
        }
    }
    out
}

/// Best guaranteed rank level per start cell; `-1` marks cells A may not
/// start from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankMap {
    pub width: usize,
    pub height: usize,
    pub grid: Vec<Vec<i64>>,
    /// Cells whose solve failed, with the error text.
    pub failures: Vec<(Cell, String)>,
    /// Product state counts per solved cell.
    pub sizes: Vec<(Cell, usize)>,
    pub aswin_calls: Vec<(Cell, usize)>,
}

impl RankMap {
    pub fn get(&self, (r, c): Cell) -> i64 {
        self.grid[r][c]
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for row in &self.grid {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_text(&self, sc: &GridScenario) -> String {
        let mut s = String::from("    ");
        for c in 0..self.width {
            let _ = write!(s, "{c:>3}");
        }
        s.push('\n');
        for (r, row) in self.grid.iter().enumerate() {
            let _ = write!(s, "{r:>3} ");
            for (c, &x) in row.iter().enumerate() {
                let cell = (r, c);
                let tag = if sc.nogo.contains(&cell) {
                    " ##".to_string()
                } else if let Some(k) = sc.pickups.iter().position(|&p| p == cell) {
                    format!(" p{}", k + 1)
                } else if let Some(k) = sc.dests.iter().position(|&p| p == cell) {
                    format!(" d{}", k + 1)
                } else if cell == sc.b_start {
                    "  B".to_string()
                } else if x < 0 {
                    "  .".to_string()
                } else {
                    format!("{x:>3}")
                };
                s.push_str(&tag);
            }
            s.push('\n');
        }
        s
    }
}

/// Level reached by P1's synthesis from one start cell, with the product
/// size and the number of almost-sure solves used.
pub fn solve_cell(sc: &GridScenario, pa: &PreferenceAutomaton, a_start: Cell) -> Result<(usize, usize, usize)> {
    let g = compile_scenario(sc, a_start)?;
    let h = build_product_bounded(&g, pa, DEFAULT_GRID_STATE_BOUND)?;
    let res = ndaswin(&h, Player::One);
    Ok((
        res.level.expect("ndaswin sets a level"),
        h.n_states(),
        res.telemetry.aswin_calls,
    ))
}

pub fn rank_map(sc: &GridScenario, spec: &PrefSpec) -> Result<RankMap> {
    rank_map_jobs(sc, spec, 1)
}

type CellResult = (Cell, Result<(usize, usize, usize)>);

/// [`rank_map`] solving up to `jobs` cells at once. The result does not
/// depend on `jobs`.
pub fn rank_map_jobs(sc: &GridScenario, spec: &PrefSpec, jobs: usize) -> Result<RankMap> {
    sc.validate()?;
    let pa = build_preference_automaton(spec, &sc.alphabet())?;
    let cells = sc.start_cells();
    let jobs = jobs.max(1).min(cells.len().max(1));
    let results: Vec<CellResult> = if jobs == 1 {
        cells.iter().map(|&c| (c, solve_cell(sc, &pa, c))).collect()
    } else {
        let chunks: Vec<Vec<Cell>> = (0..jobs)
            .map(|j| cells.iter().copied().skip(j).step_by(jobs).collect())
            .collect();
        let mut all: Vec<CellResult> = std::thread::scope(|s| {
            let handles: Vec<_> = chunks
                .iter()
                .map(|chunk| {
                    let pa = &pa;
                    s.spawn(move || chunk.iter().map(|&c| (c, solve_cell(sc, pa, c))).collect::<Vec<_>>())
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("worker panicked"))
                .collect()
        });
        all.sort_by_key(|(c, _)| *c);
        all
    };
    let mut map = RankMap {
        width: sc.width,
        height: sc.height,
        grid: vec![vec![-1; sc.width]; sc.height],
        failures: Vec::new(),
        sizes: Vec::new(),
        aswin_calls: Vec::new(),
    };
    for (c, r) in results {
        match r {
            Ok((k, n, calls)) => {
                map.grid[c.0][c.1] = k as i64;
                map.sizes.push((c, n));
                map.aswin_calls.push((c, calls));
            }
            Err(e) => map.failures.push((c, e.to_string())),
        }
    }
    Ok(map)
}
