//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

pub mod oracle;

use prefgames::game::{ConcurrentGame, Prob};
use prefgames::ltlf::{parse_ltlf, Alphabet, Formula, Letter};
use prefgames::order::{Comparison, Preorder};
use prefgames::preference::{build_preference_automaton, parse_pref_spec, LiftSemantics, PrefOp, PrefSpec, Statement};
use prefgames::product::{build_product, ProductGame};
use prefgames::rank::compute_ranks;
use rand::seq::SliceRandom;
use rand::Rng;

pub use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random game over `{p, q}`. Each joint action leads to one successor or
/// splits evenly between two.
pub fn random_game<R: Rng>(rng: &mut R, n: usize, n1: usize, n2: usize) -> ConcurrentGame {
    let names = (0..n).map(|i| format!("s{i}")).collect();
    let labels = (0..n).map(|_| Letter(rng.gen_range(0..4))).collect();
    let mut g = ConcurrentGame::new(
        names,
        Alphabet::new(["p", "q"]),
        labels,
        (0..n1).map(|i| format!("a{i}")).collect(),
        (0..n2).map(|i| format!("b{i}")).collect(),
        0,
    );
    for s in 0..n {
        for a1 in 0..n1 {
            for a2 in 0..n2 {
                let t = rng.gen_range(0..n);
                let u = rng.gen_range(0..n);
                let dist = if t == u || rng.gen_bool(0.5) {
                    vec![(t, Prob::from_integer(1))]
                } else {
                    vec![(t, Prob::new(1, 2)), (u, Prob::new(1, 2))]
                };
                g.set_transition(s, a1, a2, dist);
            }
        }
    }
    g
}

const GOALS: &[&str] = &["F p", "F q", "G !q", "p U q", "F (p & q)", "X p", "G p", "F !p"];

/// Random consistent specification with two or three goals.
pub fn random_spec<R: Rng>(rng: &mut R) -> PrefSpec {
    let k = rng.gen_range(2..=3);
    let mut pool: Vec<&str> = GOALS.to_vec();
    pool.shuffle(rng);
    let goals: Vec<_> = pool[..k]
        .iter()
        .enumerate()
        .map(|(i, t)| (format!("g{i}"), parse_ltlf(t, None).unwrap()))
        .collect();
    let mut perm: Vec<usize> = (0..k).collect();
    perm.shuffle(rng);
    let mut statements = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            match rng.gen_range(0..3) {
                0 => statements.push(Statement {
                    lhs: perm[i],
                    op: PrefOp::Strict,
                    rhs: perm[j],
                }),
                1 => statements.push(Statement {
                    lhs: perm[i],
                    op: PrefOp::Weak,
                    rhs: perm[j],
                }),
                _ => {}
            }
        }
    }
    PrefSpec::new(goals, statements, LiftSemantics::ForallExists).unwrap()
}

pub fn random_product<R: Rng>(rng: &mut R, n: usize, n1: usize, n2: usize) -> ProductGame {
    let g = random_game(rng, n, n1, n2);
    let spec = random_spec(rng);
    let pa = build_preference_automaton(&spec, g.alphabet()).unwrap();
    build_product(&g, &pa).unwrap()
}

/// Random product with at most `max_v` states and two actions per player.
pub fn tiny_product<R: Rng>(rng: &mut R, max_v: usize) -> ProductGame {
    loop {
        let n = rng.gen_range(2..=4);
        let h = random_product(rng, n, 2, 2);
        if h.n_states() <= max_v {
            return h;
        }
    }
}

/// Random preorder on `n` nodes: closure of a sparse random relation.
pub fn random_preorder<R: Rng>(rng: &mut R, n: usize) -> Preorder {
    let density = rng.gen_range(0.05..0.35);
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.gen_bool(density) {
                pairs.push((i, j));
            }
        }
    }
    Preorder::closure_of(n, pairs)
}

/// The five-node poset v1 > v2, v3 > v4, v5 > v4 (indices 0..5).
pub fn example_poset() -> Preorder {
    Preorder::closure_of(5, [(0, 1), (2, 3), (4, 3)])
}

/// Random formula of depth at most `depth` over the given atoms.
pub fn random_formula<R: Rng>(rng: &mut R, atoms: &[&str], depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..10) {
            0 => Formula::True,
            1 => Formula::False,
            _ => Formula::atom(atoms[rng.gen_range(0..atoms.len())]),
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..8) {
        0 => Formula::not(random_formula(rng, atoms, d)),
        1 => Formula::and(random_formula(rng, atoms, d), random_formula(rng, atoms, d)),
        2 => Formula::or(random_formula(rng, atoms, d), random_formula(rng, atoms, d)),
        3 => Formula::next(random_formula(rng, atoms, d)),
        4 | 5 => Formula::until(random_formula(rng, atoms, d), random_formula(rng, atoms, d)),
        6 => Formula::eventually(random_formula(rng, atoms, d)),
        _ => Formula::always(random_formula(rng, atoms, d)),
    }
}

/// Every word of length `1..=max_len` over the alphabet's letters.
pub fn all_words(ap: &Alphabet, max_len: usize) -> Vec<Vec<Letter>> {
    let letters: Vec<Letter> = ap.letters().collect();
    let mut out = Vec::new();
    let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|w| {
                letters.iter().map(move |&a| {
                    let mut w = w.clone();
                    w.push(a);
                    w
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// Random target set, each state in with probability 1/3.
pub fn random_target<R: Rng>(rng: &mut R, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.gen_bool(1.0 / 3.0)).collect()
}

pub fn data_path(name: &str) -> String {
    format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// Product of a shipped game file with a shipped preference file.
pub fn load_product(game: &str, pref: &str) -> ProductGame {
    let g = ConcurrentGame::from_json_str(&std::fs::read_to_string(data_path(game)).unwrap()).unwrap();
    let spec = parse_pref_spec(&std::fs::read_to_string(data_path(pref)).unwrap()).unwrap();
    let pa = build_preference_automaton(&spec, g.alphabet()).unwrap();
    build_product(&g, &pa).unwrap()
}

pub fn load_scenario(name: &str) -> prefgames::gridworld::GridScenario {
    prefgames::gridworld::GridScenario::from_json_str(&std::fs::read_to_string(data_path(name)).unwrap()).unwrap()
}

pub fn load_spec(name: &str) -> PrefSpec {
    parse_pref_spec(&std::fs::read_to_string(data_path(name)).unwrap()).unwrap()
}

/// The three implications relating ranks to the order, over every pair.
pub fn rank_implications_hold(r: &Preorder) -> bool {
    let ranks = compute_ranks(r).unwrap();
    let n = r.len();
    (0..n).all(|u| {
        (0..n).all(|v| {
            let (ru, rv) = (ranks.rank(u), ranks.rank(v));
            let equal_ok = ru != rv || matches!(r.compare(u, v), Comparison::Indifferent | Comparison::Incomparable);
            let greater_ok = ru <= rv || !r.ge(u, v);
            let strict_ok = !r.gt(u, v) || ru < rv;
            equal_ok && greater_ok && strict_ok
        })
    })
}

/// Random product whose specification is a strict chain of two goals, so
/// the lifted order is total.
pub fn chain_product<R: Rng>(rng: &mut R, max_v: usize) -> ProductGame {
    loop {
        let mut pool: Vec<&str> = GOALS.to_vec();
        pool.shuffle(rng);
        let goals = vec![
            ("g0".to_string(), parse_ltlf(pool[0], None).unwrap()),
            ("g1".to_string(), parse_ltlf(pool[1], None).unwrap()),
        ];
        let st = vec![Statement {
            lhs: 0,
            op: PrefOp::Strict,
            rhs: 1,
        }];
        let spec = PrefSpec::new(goals, st, LiftSemantics::ForallExists).unwrap();
        let n = rng.gen_range(2..=4);
        let g = random_game(rng, n, 2, 2);
        let pa = build_preference_automaton(&spec, g.alphabet()).unwrap();
        let h = build_product(&g, &pa).unwrap();
        if h.n_states() <= max_v {
            return h;
        }
    }
}
