//! Preferences over LTLf goals and the preference automaton.
//!
//! A [`PrefSpec`] names a list of goals and a set of atomic statements
//! between them. The statements are closed into a [`Preorder`] on goal
//! indices, lifted to sets of satisfied goals, and attached to the
//! synchronous product of the goals' DFAs.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ltlf::{parse_ltlf, to_dfa, Alphabet, Dfa, Formula, Letter};
use crate::order::{Comparison, Preorder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PrefOp {
    /// `>`
    Strict,
    /// `>=`
    Weak,
    /// `~`
    Indifferent,
}

impl PrefOp {
    pub fn symbol(self) -> &'static str {
        match self {
            PrefOp::Strict => ">",
            PrefOp::Weak => ">=",
            PrefOp::Indifferent => "~",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Statement {
    pub lhs: usize,
    pub op: PrefOp,
    pub rhs: usize,
}

/// How a preorder on goals is lifted to sets of satisfied goals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub enum LiftSemantics {
    /// `X >= Y` iff every goal in `Y` is weakly below some goal in `X`.
    #[default]
    ForallExists,
}

impl FromStr for LiftSemantics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forall-exists" => Ok(LiftSemantics::ForallExists),
            other => Err(Error::UnknownSemantics(other.to_string())),
        }
    }
}

impl LiftSemantics {
    pub fn as_str(self) -> &'static str {
        match self {
            LiftSemantics::ForallExists => "forall-exists",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrefSpec {
    pub names: Vec<String>,
    pub formulas: Vec<Formula>,
    pub statements: Vec<Statement>,
    pub semantics: LiftSemantics,
}

impl PrefSpec {
    pub fn new(goals: Vec<(String, Formula)>, statements: Vec<Statement>, semantics: LiftSemantics) -> Result<Self> {
        if goals.is_empty() {
            return Err(Error::Invalid("preference spec needs at least one formula".into()));
        }
        if goals.len() > 64 {
            return Err(Error::Invalid("at most 64 formulas are supported".into()));
        }
        let mut names = Vec::new();
        let mut formulas = Vec::new();
        for (name, f) in goals {
            if names.contains(&name) {
                return Err(Error::DuplicateName(name));
            }
            names.push(name);
            formulas.push(f);
        }
        for s in &statements {
            if s.lhs >= names.len() || s.rhs >= names.len() {
                return Err(Error::Invalid(format!("statement index out of range: {s:?}")));
            }
        }
        Ok(PrefSpec {
            names,
            formulas,
            statements,
            semantics,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Propositions mentioned by any goal.
    pub fn atoms(&self) -> Alphabet {
        Alphabet::new(self.formulas.iter().flat_map(|f| f.atoms()))
    }

    pub fn preorder(&self) -> Result<Preorder> {
        close_preorder(&self.statements, self.len(), &self.names)
    }

    pub fn describe(&self, s: &Statement) -> String {
        format!("{} {} {}", self.names[s.lhs], s.op.symbol(), self.names[s.rhs])
    }
}

/// Parses the line-oriented preference file format:
///
/// ```text
/// # comment
/// formula f1 := F d1 & G !o
/// pref f1 > f2
/// semantics forall-exists
/// ```
pub fn parse_pref_spec(text: &str) -> Result<PrefSpec> {
    let mut goals: Vec<(String, Formula)> = Vec::new();
    let mut raw_prefs: Vec<(usize, String, PrefOp, String)> = Vec::new();
    let mut semantics = LiftSemantics::default();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match kw {
            "formula" => {
                let (name, body) = rest
                    .split_once(":=")
                    .ok_or_else(|| Error::Invalid(format!("line {lineno}: expected `formula <name> := <ltlf>`")))?;
                let name = name.trim();
                if name.is_empty() || name.contains(char::is_whitespace) {
                    return Err(Error::Invalid(format!("line {lineno}: bad formula name")));
                }
                if goals.iter().any(|(n, _)| n == name) {
                    return Err(Error::DuplicateName(name.to_string()));
                }
                let f = parse_ltlf(body.trim(), None).map_err(|e| match e {
                    Error::Syntax { pos, msg } => Error::Syntax {
                        pos,
                        msg: format!("line {lineno}, formula `{name}`: {msg}"),
                    },
                    e => e,
                })?;
                goals.push((name.to_string(), f));
            }
            "pref" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(Error::Invalid(format!(
                        "line {lineno}: expected `pref <name> (>|>=|~) <name>`"
                    )));
                }
                let op = match parts[1] {
                    ">" => PrefOp::Strict,
                    ">=" => PrefOp::Weak,
                    "~" => PrefOp::Indifferent,
                    other => return Err(Error::Invalid(format!("line {lineno}: unknown operator `{other}`"))),
                };
                raw_prefs.push((lineno, parts[0].to_string(), op, parts[2].to_string()));
            }
            "semantics" => semantics = rest.parse()?,
            other => return Err(Error::Invalid(format!("line {lineno}: unknown keyword `{other}`"))),
        }
    }
    let lookup = |n: &str| {
        goals
            .iter()
            .position(|(g, _)| g == n)
            .ok_or_else(|| Error::UnknownName(n.to_string()))
    };
    let mut statements = Vec::new();
    for (_, l, op, r) in &raw_prefs {
        statements.push(Statement {
            lhs: lookup(l)?,
            op: *op,
            rhs: lookup(r)?,
        });
    }
    PrefSpec::new(goals, statements, semantics)
}

/// Reflexive-transitive closure of the statements, rejecting any strict
/// statement whose reverse becomes derivable.
pub fn close_preorder(statements: &[Statement], n: usize, names: &[String]) -> Result<Preorder> {
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for s in statements {
        if s.lhs >= n || s.rhs >= n {
            return Err(Error::Invalid(format!("statement index out of range: {s:?}")));
        }
        edges.push((s.lhs, s.rhs));
        if s.op == PrefOp::Indifferent {
            edges.push((s.rhs, s.lhs));
        }
    }
    let r = Preorder::closure_of(n, edges.iter().copied());
    let name = |i: usize| names.get(i).cloned().unwrap_or_else(|| i.to_string());
    for s in statements.iter().filter(|s| s.op == PrefOp::Strict) {
        if r.ge(s.rhs, s.lhs) {
            let path = find_path(&edges, n, s.rhs, s.lhs);
            let cycle = path.into_iter().map(name).collect::<Vec<_>>().join(" >= ");
            return Err(Error::Inconsistent {
                statement: format!("{} > {}", name(s.lhs), name(s.rhs)),
                cycle,
            });
        }
    }
    debug_assert!(r.validate().is_ok());
    Ok(r)
}

fn find_path(edges: &[(usize, usize)], n: usize, from: usize, to: usize) -> Vec<usize> {
    let mut parent = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            break;
        }
        for &(a, b) in edges {
            if a == u && !seen[b] {
                seen[b] = true;
                parent[b] = u;
                queue.push_back(b);
            }
        }
    }
    let mut path = vec![to];
    let mut cur = to;
    while cur != from && parent[cur] != usize::MAX {
        cur = parent[cur];
        path.push(cur);
    }
    path.reverse();
    path
}

/// Set of goal indices as a bitmask.
pub type GoalSet = u64;

pub fn goal_set(indices: impl IntoIterator<Item = usize>) -> GoalSet {
    indices.into_iter().fold(0, |acc, i| acc | 1 << i)
}

pub fn goal_indices(x: GoalSet) -> Vec<usize> {
    (0..64).filter(|i| x >> i & 1 == 1).collect()
}

fn lift_weak(x: GoalSet, y: GoalSet, r: &Preorder) -> bool {
    let n = r.len();
    (0..n)
        .filter(|j| y >> j & 1 == 1)
        .all(|j| (0..n).any(|i| x >> i & 1 == 1 && r.ge(i, j)))
}

/// Compares two sets of satisfied goals under the lifted preorder.
pub fn lift_compare(x: GoalSet, y: GoalSet, r: &Preorder, semantics: LiftSemantics) -> Comparison {
    match semantics {
        LiftSemantics::ForallExists => Comparison::from_weak(lift_weak(x, y, r), lift_weak(y, x, r)),
    }
}

/// Semi-automaton over `2^AP` tracking every goal's DFA, with a preorder on
/// its states derived from which goals each state satisfies.
#[derive(Debug, Clone)]
pub struct PreferenceAutomaton {
    spec: PrefSpec,
    ap: Alphabet,
    dfas: Vec<Dfa>,
    components: Vec<Vec<usize>>,
    delta: Vec<usize>,
    sat: Vec<GoalSet>,
    goal_order: Preorder,
    order: Preorder,
}

pub const DEFAULT_PA_STATE_BOUND: usize = 100_000;

pub fn build_preference_automaton(spec: &PrefSpec, ap: &Alphabet) -> Result<PreferenceAutomaton> {
    build_preference_automaton_bounded(spec, ap, DEFAULT_PA_STATE_BOUND)
}

pub fn build_preference_automaton_bounded(
    spec: &PrefSpec,
    ap: &Alphabet,
    max_states: usize,
) -> Result<PreferenceAutomaton> {
    let goal_order = spec.preorder()?;
    let dfas = spec
        .formulas
        .iter()
        .map(|f| to_dfa(f, ap))
        .collect::<Result<Vec<_>>>()?;
    let nl = ap.n_letters();
    let init: Vec<usize> = dfas.iter().map(Dfa::initial).collect();
    let mut ids: HashMap<Vec<usize>, usize> = HashMap::from([(init.clone(), 0)]);
    let mut components = vec![init];
    let mut delta = Vec::new();
    let mut i = 0;
    while i < components.len() {
        for a in ap.letters() {
            let next: Vec<usize> = components[i].iter().zip(&dfas).map(|(&q, d)| d.next(q, a)).collect();
            let id = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    if components.len() >= max_states {
                        return Err(Error::StateBound(max_states));
                    }
                    let id = components.len();
                    ids.insert(next.clone(), id);
                    components.push(next);
                    id
                }
            };
            delta.push(id);
        }
        i += 1;
    }
    debug_assert_eq!(delta.len(), components.len() * nl);
    let sat: Vec<GoalSet> = components
        .iter()
        .map(|qs| goal_set((0..dfas.len()).filter(|&k| dfas[k].is_accepting(qs[k]))))
        .collect();

    let mut cache: HashMap<(GoalSet, GoalSet), bool> = HashMap::new();
    let n = components.len();
    let mut bits = vec![false; n * n];
    for p in 0..n {
        for q in 0..n {
            bits[p * n + q] = *cache.entry((sat[p], sat[q])).or_insert_with(|| {
                matches!(
                    lift_compare(sat[p], sat[q], &goal_order, spec.semantics),
                    Comparison::StrictlyGreater | Comparison::Indifferent
                )
            });
        }
    }
    let order = Preorder::from_fn(n, |p, q| bits[p * n + q]);
    order.validate()?;
    Ok(PreferenceAutomaton {
        spec: spec.clone(),
        ap: ap.clone(),
        dfas,
        components,
        delta,
        sat,
        goal_order,
        order,
    })
}

impl PreferenceAutomaton {
    pub fn spec(&self) -> &PrefSpec {
        &self.spec
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.ap
    }

    pub fn dfas(&self) -> &[Dfa] {
        &self.dfas
    }

    pub fn n_states(&self) -> usize {
        self.components.len()
    }

    pub fn initial(&self) -> usize {
        0
    }

    pub fn components(&self, q: usize) -> &[usize] {
        &self.components[q]
    }

    pub fn next(&self, q: usize, a: Letter) -> usize {
        self.delta[q * self.ap.n_letters() + a.index()]
    }

    pub fn run(&self, word: &[Letter]) -> usize {
        word.iter().fold(self.initial(), |q, &a| self.next(q, a))
    }

    pub fn sat(&self, q: usize) -> GoalSet {
        self.sat[q]
    }

    /// The preorder `E` on automaton states.
    pub fn order(&self) -> &Preorder {
        &self.order
    }

    pub fn goal_order(&self) -> &Preorder {
        &self.goal_order
    }

    /// Compares two words by the states they reach.
    pub fn compare_words(&self, w: &[Letter], w2: &[Letter]) -> Result<Comparison> {
        if w.is_empty() || w2.is_empty() {
            return Err(Error::EmptyWord);
        }
        if let Some(bad) = w.iter().chain(w2).find(|l| !self.ap.contains_letter(**l)) {
            return Err(Error::LetterOutsideAlphabet(format!("{:#b}", bad.0)));
        }
        Ok(self.order.compare(self.run(w), self.run(w2)))
    }

    pub fn sat_names(&self, q: usize) -> Vec<String> {
        goal_indices(self.sat[q])
            .into_iter()
            .map(|i| self.spec.names[i].clone())
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let states: Vec<serde_json::Value> = (0..self.n_states())
            .map(|q| {
                serde_json::json!({
                    "id": q,
                    "components": self.components[q],
                    "sat": self.sat_names(q),
                })
            })
            .collect();
        let transitions: Vec<serde_json::Value> = (0..self.n_states())
            .flat_map(|q| {
                self.ap
                    .letters()
                    .map(move |a| serde_json::json!([q, self.ap.letter_props(a), self.next(q, a)]))
            })
            .collect();
        let edges: Vec<[usize; 2]> = self.order.pairs().map(|(i, j)| [i, j]).collect();
        serde_json::json!({
            "ap": self.ap.props(),
            "formulas": self.spec.names.iter().zip(&self.spec.formulas)
                .map(|(n, f)| serde_json::json!({"name": n, "ltlf": f.to_string()}))
                .collect::<Vec<_>>(),
            "semantics": self.spec.semantics.as_str(),
            "initial": self.initial(),
            "states": states,
            "transitions": transitions,
            "edges": edges,
        })
    }

    /// Strict edges of `E` between one representative per Sat class,
    /// transitively reduced.
    pub fn to_dot(&self) -> String {
        let mut reps: Vec<usize> = Vec::new();
        for q in 0..self.n_states() {
            if !reps.iter().any(|&r| self.sat[r] == self.sat[q]) {
                reps.push(q);
            }
        }
        let mut s = String::from("digraph preference {\n");
        for &r in &reps {
            let _ = writeln!(s, "  q{r} [label=\"q{r}: {{{}}}\"];", self.sat_names(r).join(","));
        }
        for &a in &reps {
            for &b in &reps {
                if !self.order.gt(a, b) {
                    continue;
                }
                let covered = reps.iter().any(|&c| self.order.gt(a, c) && self.order.gt(c, b));
                if !covered {
                    let _ = writeln!(s, "  q{a} -> q{b};");
                }
            }
        }
        s.push_str("}\n");
        s
    }
}
