//! Acceptance criteria, one test each. Every test prints a single
//! `criterion N: PASS|FAIL ...` line, then asserts.

mod common;

use std::io::Write;
use std::time::Instant;

use common::oracle::{enumeration_region, value_iteration_region};
use common::{
    all_words, chain_product, example_poset, load_scenario, load_spec, random_formula, random_game, random_preorder,
    random_product, random_target, rank_implications_hold, rng, tiny_product,
};
use prefgames::analysis::{
    check_nash, constant_sum_check, constant_sum_holds, constant_sum_violation, estimate_outcomes, verify_ndaswin,
    EnumBounds,
};
use prefgames::game::{Player, Strategy};
use prefgames::gridworld::{compile_scenario, rank_map, GridScenario};
use prefgames::ltlf::{eval_word, to_dfa, Alphabet};
use prefgames::order::Comparison;
use prefgames::preference::{build_preference_automaton, PrefSpec};
use prefgames::product::{build_product, ProductGame};
use prefgames::rank::compute_ranks;
use prefgames::solver::{aswin, ndaswin, rank_target};
use rand::Rng;

/// Writes past the test harness's output capture so the line always shows.
fn report(n: usize, ok: bool, detail: &str, started: Instant) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    let line = format!("\ncriterion {n}: {verdict} {detail} ({:.2?})\n", started.elapsed());
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn grid_product(sc: &GridScenario, spec: &PrefSpec, cell: (usize, usize)) -> ProductGame {
    let pa = build_preference_automaton(spec, &sc.alphabet()).unwrap();
    build_product(&compile_scenario(sc, cell).unwrap(), &pa).unwrap()
}

#[test]
fn criterion_01_example_ranks() {
    let t = Instant::now();
    let r = compute_ranks(&example_poset()).unwrap();
    let tr = compute_ranks(&example_poset().transpose()).unwrap();
    let ok = r.ranks() == [0, 1, 0, 1, 0]
        && r.kmax() == 1
        && tr.ranks() == [1, 0, 1, 0, 1]
        && constant_sum_holds(&r, &tr, r.kmax(), tr.kmax());
    report(1, ok, &format!("ranks {:?}, transpose {:?}", r.ranks(), tr.ranks()), t);
    assert!(ok);
}

#[test]
fn criterion_02_rank_implications() {
    let t = Instant::now();
    let mut rng = rng(2);
    let mut bad = 0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=8);
        if !rank_implications_hold(&random_preorder(&mut rng, n)) {
            bad += 1;
        }
    }
    let r = example_poset();
    let k = compute_ranks(&r).unwrap();
    let falsified = r.compare(1, 2) == Comparison::Incomparable
        && k.rank(1) != k.rank(2)
        && k.rank(2) < k.rank(1)
        && !r.gt(2, 1)
        && r.compare(2, 4) == Comparison::Incomparable
        && k.rank(2) == k.rank(4);
    let ok = bad == 0 && falsified;
    report(
        2,
        ok,
        &format!("{bad}/200 preorders violate, converse falsifiers reproduce: {falsified}"),
        t,
    );
    assert!(ok);
}

#[test]
fn criterion_03_constant_sum() {
    let t = Instant::now();
    let mut rng = rng(3);
    let mut total = 0;
    let mut bad = Vec::new();
    for i in 0..60 {
        let n = rng.gen_range(2..=5);
        let h = random_product(&mut rng, n, 2, 2);
        total += 1;
        if let Some((v, r1, r2)) = constant_sum_violation(&h) {
            bad.push(format!(
                "random#{i} state {v}: {r1}+{r2} vs kmax {}",
                h.kmax(Player::One)
            ));
        }
    }
    let grids = [
        ("gridworld_3x3.json", "delivery1.pref", vec![(0, 0), (1, 0), (2, 2)]),
        ("gridworld_5x5.json", "delivery.pref", vec![(0, 1), (0, 3), (1, 2)]),
    ];
    for (sc, spec, cells) in grids {
        let (sc_, spec_) = (load_scenario(sc), load_spec(spec));
        for c in cells {
            let h = grid_product(&sc_, &spec_, c);
            total += 1;
            if !constant_sum_check(&h) {
                let (v, r1, r2) = constant_sum_violation(&h).unwrap();
                bad.push(format!(
                    "{sc} {c:?} state {}: {r1}+{r2} vs kmax {}",
                    h.game().state_name(v),
                    h.kmax(Player::One)
                ));
            }
        }
    }
    let ok = bad.is_empty();
    let first = bad.first().cloned().unwrap_or_default();
    report(
        3,
        ok,
        &format!("{} of {total} products violate; first: {first}", bad.len()),
        t,
    );
    assert!(ok, "{bad:?}");
}

#[test]
fn criterion_04_ltlf_oracle() {
    let t = Instant::now();
    let names = ["a", "b", "c"];
    let mut rng = rng(4);
    let mut checked = 0usize;
    let mut bad = Vec::new();
    for _ in 0..500 {
        let k = rng.gen_range(1..=3);
        let atoms = &names[..k];
        let ap = Alphabet::new(atoms.iter().copied());
        let f = random_formula(&mut rng, atoms, 4);
        let dfa = to_dfa(&f, &ap).unwrap();
        for w in all_words(&ap, 5) {
            checked += 1;
            if dfa.accepts(&w) != eval_word(&f, &ap, &w).unwrap() {
                bad.push(format!("{f} on {w:?}"));
                break;
            }
        }
    }
    let ok = bad.is_empty();
    report(
        4,
        ok,
        &format!("500 formulas, {checked} words, {} mismatches", bad.len()),
        t,
    );
    assert!(ok, "{bad:?}");
}

#[test]
fn criterion_05_aswin_exact() {
    let t = Instant::now();
    let mut rng = rng(5);
    let (mut bad, mut enumerated) = (0, 0);
    for _ in 0..300 {
        let n = rng.gen_range(1..=6);
        let (n1, n2) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
        let g = random_game(&mut rng, n, n1, n2);
        let target = random_target(&mut rng, n);
        for player in [Player::One, Player::Two] {
            let region = aswin(&g, &target, player).region;
            if n <= 4 {
                enumerated += 1;
                bad += usize::from(region != enumeration_region(&g, &target, player));
            }
            bad += usize::from(region != value_iteration_region(&g, &target, player));
        }
    }
    let ok = bad == 0;
    report(
        5,
        ok,
        &format!("300 games x 2 players, {enumerated} also enumerated, {bad} mismatches"),
        t,
    );
    assert!(ok);
}

#[test]
fn criterion_06_ndaswin_realization() {
    let t = Instant::now();
    let mut rng = rng(6);
    let (mut rejected, mut not_minimal) = (0, 0);
    let mut first = String::new();
    for i in 0..100 {
        let h = tiny_product(&mut rng, 6);
        let res = ndaswin(&h, Player::One);
        let k = res.level.unwrap();
        let out = verify_ndaswin(&h, &res.strategy, EnumBounds::default()).unwrap();
        if !out.holds {
            rejected += 1;
            if first.is_empty() {
                first = format!("instance {i}: {}", out.witness.unwrap().reason);
            }
        }
        if k > 0 && aswin(h.game(), &rank_target(&h, Player::One, k - 1), Player::One).region[h.init()] {
            not_minimal += 1;
        }
    }
    let ok = rejected == 0 && not_minimal == 0;
    report(
        6,
        ok,
        &format!("{rejected}/100 strategies dominated, {not_minimal} levels not minimal; {first}"),
        t,
    );
    assert!(ok);
}

#[test]
fn criterion_07_nash() {
    let t = Instant::now();
    let mut rng = rng(7);
    let mut failed = 0;
    for _ in 0..50 {
        let h = tiny_product(&mut rng, 6);
        let s1 = ndaswin(&h, Player::One);
        let s2 = ndaswin(&h, Player::Two);
        failed += usize::from(
            !check_nash(&h, &s1.strategy, &s2.strategy, EnumBounds::default())
                .unwrap()
                .holds,
        );
    }
    // Stopping at the start when P1 could surely do better: with a total
    // order every outcome of rank below rank(v0) beats v0 outright.
    let (mut constructed, mut caught) = (0, 0);
    for _ in 0..2000 {
        if constructed == 20 {
            break;
        }
        let h = chain_product(&mut rng, 6);
        let s1 = ndaswin(&h, Player::One);
        if s1.level.unwrap() >= h.rank(Player::One, h.init()) {
            continue;
        }
        constructed += 1;
        let stop = Strategy::undefined(Player::One, h.n_states());
        let s2 = ndaswin(&h, Player::Two);
        let out = check_nash(&h, &stop, &s2.strategy, EnumBounds::default()).unwrap();
        caught += usize::from(!out.holds && out.witness.is_some());
    }
    let ok = failed == 0 && constructed >= 10 && caught == constructed;
    report(
        7,
        ok,
        &format!("{failed}/50 ndaswin pairs not Nash; {caught}/{constructed} constructed profiles rejected"),
        t,
    );
    assert!(ok);
}

#[test]
fn criterion_08_rollouts() {
    let t = Instant::now();
    let picks: [(&str, &str, (usize, usize)); 10] = [
        ("gridworld_3x3_noslip.json", "delivery1.pref", (0, 0)),
        ("gridworld_3x3_noslip.json", "delivery1.pref", (1, 0)),
        ("gridworld_3x3_noslip.json", "delivery1.pref", (1, 2)),
        ("gridworld_3x3_noslip.json", "delivery1.pref", (2, 1)),
        ("gridworld_3x3.json", "delivery1.pref", (0, 0)),
        ("gridworld_3x3.json", "delivery1.pref", (2, 2)),
        ("gridworld_5x5_noslip.json", "delivery.pref", (4, 1)),
        ("gridworld_5x5_noslip.json", "delivery.pref", (4, 2)),
        ("gridworld_5x5_noslip.json", "delivery.pref", (3, 1)),
        ("gridworld_5x5.json", "delivery.pref", (0, 1)),
    ];
    let mut worst = 1.0f64;
    for (i, (sc, spec, cell)) in picks.iter().enumerate() {
        let h = grid_product(&load_scenario(sc), &load_spec(spec), *cell);
        let s1 = ndaswin(&h, Player::One);
        let k = s1.level.unwrap();
        let uniform = Strategy::undefined(Player::Two, h.n_states());
        let s2 = ndaswin(&h, Player::Two);
        for pi2 in [&uniform, &s2.strategy] {
            let est = estimate_outcomes(&h, &s1.strategy, pi2, 10_000, 80 + i as u64, 500);
            worst = worst.min(est.at_most(k) as f64 / est.runs as f64);
        }
    }
    let ok = worst >= 0.99;
    report(
        8,
        ok,
        &format!("10 strategies x 2 opponents x 10000 runs, worst rate at rank <= k: {worst:.4}"),
        t,
    );
    assert!(ok);
}

#[test]
fn criterion_09_gridworld_anchors() {
    let t = Instant::now();
    let sc = load_scenario("gridworld_5x5.json");
    let map = rank_map(&sc, &load_spec("delivery.pref")).unwrap();
    let anchors: Vec<i64> = [(0, 1), (0, 3), (1, 2)].iter().map(|&c| map.get(c)).collect();
    let zeros = sc.start_cells().iter().filter(|&&c| map.get(c) == 0).count();
    let invalid_ok = (0..sc.height)
        .flat_map(|r| (0..sc.width).map(move |c| (r, c)))
        .all(|c| (map.get(c) == -1) == !sc.is_valid_start(c));
    let ok = anchors == [3, 3, 3] && zeros >= 1 && invalid_ok && map.failures.is_empty();
    report(
        9,
        ok,
        &format!("anchors {anchors:?}, {zeros} rank-0 start cells, invalid cells -1: {invalid_ok}"),
        t,
    );
    assert!(ok, "\n{}", map.to_text(&sc));
}

#[test]
fn criterion_10_aswin_calls() {
    let t = Instant::now();
    let mut rng = rng(10);
    let (mut instances, mut over) = (0, 0);
    for _ in 0..100 {
        let h = tiny_product(&mut rng, 6);
        for p in [Player::One, Player::Two] {
            instances += 1;
            over += usize::from(ndaswin(&h, p).telemetry.aswin_calls > h.kmax(p) + 1);
        }
    }
    for (sc, spec) in [
        ("gridworld_3x3.json", "delivery1.pref"),
        ("gridworld_5x5_noslip.json", "delivery.pref"),
    ] {
        let sc = load_scenario(sc);
        let spec = load_spec(spec);
        let pa = build_preference_automaton(&spec, &sc.alphabet()).unwrap();
        let kmax = compute_ranks(pa.order()).unwrap().kmax();
        for (_, calls) in rank_map(&sc, &spec).unwrap().aswin_calls {
            instances += 1;
            over += usize::from(calls > kmax + 1);
        }
    }
    let ok = over == 0;
    report(10, ok, &format!("{over} of {instances} solves exceed kmax+1 calls"), t);
    assert!(ok);
}
