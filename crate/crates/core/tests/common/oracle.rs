//! Brute-force references for almost-sure reachability.

use prefgames::game::{prob_to_f64, ConcurrentGame, Player};

/// Calls `f` with every assignment of a nonempty action mask to each
/// non-target state (targets get mask 0).
fn for_each_support(n_actions: usize, target: &[bool], mut f: impl FnMut(&[u32])) {
    let free: Vec<usize> = (0..target.len()).filter(|&v| !target[v]).collect();
    let top = (1u32 << n_actions) - 1;
    let mut masks = vec![0u32; target.len()];
    for &v in &free {
        masks[v] = 1;
    }
    loop {
        f(&masks);
        let mut i = 0;
        loop {
            if i == free.len() {
                return;
            }
            let v = free[i];
            if masks[v] < top {
                masks[v] += 1;
                break;
            }
            masks[v] = 1;
            i += 1;
        }
    }
}

fn bits(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| mask >> i & 1 == 1)
}

/// States won by the support strategy `masks` against one pure opponent
/// strategy `reply`, read off the induced graph.
fn graph_wins(g: &ConcurrentGame, player: Player, target: &[bool], masks: &[u32], reply: &[usize]) -> Vec<bool> {
    let n = target.len();
    let mut succ = vec![Vec::new(); n];
    for v in (0..n).filter(|&v| !target[v]) {
        for a in bits(masks[v]) {
            for &(t, p) in g.dist_for(player, v, a, reply[v]) {
                if *p.numer() != 0 {
                    succ[v].push(t);
                }
            }
        }
    }
    let mut can = target.to_vec();
    let mut changed = true;
    while changed {
        changed = false;
        for v in 0..n {
            if !can[v] && succ[v].iter().any(|&t| can[t]) {
                can[v] = true;
                changed = true;
            }
        }
    }
    (0..n)
        .map(|v| {
            let mut seen = vec![false; n];
            let mut stack = vec![v];
            seen[v] = true;
            while let Some(u) = stack.pop() {
                if !can[u] {
                    return false;
                }
                for &t in &succ[u] {
                    if !seen[t] {
                        seen[t] = true;
                        stack.push(t);
                    }
                }
            }
            true
        })
        .collect()
}

/// States from which the support strategy `masks` wins against every pure
/// memoryless opponent strategy.
pub fn support_wins(g: &ConcurrentGame, target: &[bool], player: Player, masks: &[u32]) -> Vec<bool> {
    let n = target.len();
    let no = g.n_actions(player.opponent());
    let free: Vec<usize> = (0..n).filter(|&v| !target[v]).collect();
    let mut wins = vec![true; n];
    let mut reply = vec![0usize; n];
    loop {
        let w = graph_wins(g, player, target, masks, &reply);
        for v in 0..n {
            wins[v] &= w[v];
        }
        let mut i = 0;
        while i < free.len() {
            let v = free[i];
            if reply[v] + 1 < no {
                reply[v] += 1;
                break;
            }
            reply[v] = 0;
            i += 1;
        }
        if i == free.len() {
            return wins;
        }
    }
}

/// Region where some memoryless support strategy wins against every pure
/// memoryless opponent strategy.
pub fn enumeration_region(g: &ConcurrentGame, target: &[bool], player: Player) -> Vec<bool> {
    let mut region = target.to_vec();
    for_each_support(g.n_actions(player), target, |masks| {
        for (r, w) in region.iter_mut().zip(support_wins(g, target, player, masks)) {
            *r |= w;
        }
    });
    region
}

pub const THRESHOLD: f64 = 1.0 - 1e-9;

/// Region where some memoryless uniform-support strategy reaches the target
/// with probability at least [`THRESHOLD`] against the minimizing opponent,
/// by interval value iteration.
pub fn value_iteration_region(g: &ConcurrentGame, target: &[bool], player: Player) -> Vec<bool> {
    let n = target.len();
    let no = g.n_actions(player.opponent());
    let mut region = target.to_vec();
    for_each_support(g.n_actions(player), target, |masks| {
        // states where the opponent keeps the target unreachable forever
        let mut zero: Vec<bool> = target.iter().map(|&t| !t).collect();
        let mut changed = true;
        while changed {
            changed = false;
            for v in 0..n {
                if zero[v]
                    && !(0..no).any(|b| {
                        bits(masks[v]).all(|a| {
                            g.dist_for(player, v, a, b)
                                .iter()
                                .all(|&(t, p)| *p.numer() == 0 || zero[t])
                        })
                    })
                {
                    zero[v] = false;
                    changed = true;
                }
            }
        }
        let step = |x: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|v| {
                    if target[v] {
                        return 1.0;
                    }
                    if zero[v] {
                        return 0.0;
                    }
                    let w = 1.0 / masks[v].count_ones() as f64;
                    (0..no)
                        .map(|b| {
                            bits(masks[v])
                                .map(|a| {
                                    g.dist_for(player, v, a, b)
                                        .iter()
                                        .map(|&(t, p)| prob_to_f64(p) * x[t])
                                        .sum::<f64>()
                                        * w
                                })
                                .sum::<f64>()
                        })
                        .fold(f64::INFINITY, f64::min)
                })
                .collect()
        };
        let mut lo: Vec<f64> = target.iter().map(|&t| if t { 1.0 } else { 0.0 }).collect();
        let mut hi: Vec<f64> = (0..n).map(|v| if zero[v] { 0.0 } else { 1.0 }).collect();
        for _ in 0..1_000_000 {
            if (0..n).all(|v| lo[v] >= THRESHOLD || hi[v] < THRESHOLD) {
                break;
            }
            lo = step(&lo);
            hi = step(&hi);
        }
        assert!(
            (0..n).all(|v| lo[v] >= THRESHOLD || hi[v] < THRESHOLD),
            "value iteration did not separate"
        );
        for v in 0..n {
            region[v] |= lo[v] >= THRESHOLD;
        }
    });
    region
}

fn positive(g: &ConcurrentGame, player: Player, v: usize, a: usize, b: usize) -> Vec<usize> {
    g.dist_for(player, v, a, b)
        .iter()
        .filter(|(_, p)| *p.numer() != 0)
        .map(|&(t, _)| t)
        .collect()
}

/// The almost-sure fixpoint computed literally: every iterate recomputed
/// over all states from scratch.
pub fn naive_aswin(g: &ConcurrentGame, target: &[bool], player: Player) -> Vec<bool> {
    let n = target.len();
    let (nm, no) = (g.n_actions(player), g.n_actions(player.opponent()));
    let mut y = vec![true; n];
    loop {
        let mut x: Vec<bool> = (0..n).map(|v| y[v] && target[v]).collect();
        loop {
            let next: Vec<bool> = (0..n)
                .map(|v| {
                    if !y[v] {
                        return false;
                    }
                    if target[v] {
                        return true;
                    }
                    let safe: Vec<usize> = (0..nm)
                        .filter(|&a| (0..no).all(|b| positive(g, player, v, a, b).iter().all(|&t| y[t])))
                        .collect();
                    !safe.is_empty()
                        && (0..no).all(|b| safe.iter().any(|&a| positive(g, player, v, a, b).iter().any(|&t| x[t])))
                })
                .collect();
            if next == x {
                break;
            }
            x = next;
        }
        if x == y {
            return y;
        }
        y = x;
    }
}

/// Smallest probability, over the opponent's replies, that play under the
/// fixed distributions `sigma` hits `target`. Interval value iteration to
/// within `eps`; returns the lower bound.
pub fn min_reach_probability(
    g: &ConcurrentGame,
    target: &[bool],
    player: Player,
    sigma: &dyn Fn(usize) -> Vec<(usize, f64)>,
    eps: f64,
) -> Vec<f64> {
    let n = target.len();
    let no = g.n_actions(player.opponent());
    let moves: Vec<Vec<(usize, f64)>> = (0..n).map(sigma).collect();
    let mut zero: Vec<bool> = target.iter().map(|&t| !t).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for v in 0..n {
            if zero[v]
                && !(0..no).any(|b| {
                    moves[v]
                        .iter()
                        .all(|&(a, _)| positive(g, player, v, a, b).iter().all(|&t| zero[t]))
                })
            {
                zero[v] = false;
                changed = true;
            }
        }
    }
    let step = |x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|v| {
                if target[v] {
                    1.0
                } else if zero[v] {
                    0.0
                } else {
                    (0..no)
                        .map(|b| {
                            moves[v]
                                .iter()
                                .map(|&(a, w)| {
                                    w * g
                                        .dist_for(player, v, a, b)
                                        .iter()
                                        .map(|&(t, p)| prob_to_f64(p) * x[t])
                                        .sum::<f64>()
                                })
                                .sum::<f64>()
                        })
                        .fold(f64::INFINITY, f64::min)
                }
            })
            .collect()
    };
    let mut lo: Vec<f64> = target.iter().map(|&t| if t { 1.0 } else { 0.0 }).collect();
    let mut hi: Vec<f64> = (0..n).map(|v| if zero[v] { 0.0 } else { 1.0 }).collect();
    for _ in 0..200_000 {
        if (0..n).all(|v| hi[v] - lo[v] < eps) {
            break;
        }
        lo = step(&lo);
        hi = step(&hi);
    }
    lo
}
