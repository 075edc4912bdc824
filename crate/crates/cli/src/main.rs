use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use prefgames::analysis::{
    check_nash, constant_sum_check, constant_sum_violation, estimate_outcomes, max_rank, max_rank_outcomes_minimal,
    opponent_guarantee, outcome_set, verify_ndaswin, EnumBounds, Report,
};
use prefgames::game::{ConcurrentGame, Player, Strategy};
use prefgames::gridworld::{rank_map_jobs, GridScenario};
use prefgames::ltlf::{parse_ltlf, to_dfa, Alphabet};
use prefgames::preference::{build_preference_automaton, parse_pref_spec, PrefSpec};
use prefgames::product::{build_product, ProductGame};
use prefgames::rank::rank_csv;
use prefgames::solver::ndaswin;

/// Non-dominated almost-sure strategy synthesis for concurrent games with
/// LTLf preferences.
#[derive(Parser)]
#[command(name = "prefgames", version)]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for per-cell solves.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile an LTLf formula to a minimal DFA.
    Ltlf2dfa {
        #[arg(long, conflicts_with = "file")]
        formula: Option<String>,
        #[arg(long)]
        file: Option<PathBuf>,
        /// Comma-separated propositions; defaults to those in the formula.
        #[arg(long, value_delimiter = ',')]
        ap: Option<Vec<String>>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Build the preference automaton of a specification.
    Pref2pdfa {
        spec: PathBuf,
        #[arg(long, value_delimiter = ',')]
        ap: Option<Vec<String>>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Build the product game and its rank tables.
    Product {
        game: PathBuf,
        spec: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Synthesize a non-dominated almost-sure winning strategy.
    Solve {
        game: PathBuf,
        spec: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        player: u8,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Best guaranteed rank for every start cell of a gridworld.
    Rankmap {
        scenario: PathBuf,
        spec: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Seeded rollouts of a strategy profile in the product.
    Simulate {
        game: PathBuf,
        spec: PathBuf,
        /// P1 strategy file; synthesized when absent.
        #[arg(long)]
        strategy: Option<PathBuf>,
        /// P2 behaviour when no P2 strategy file is given.
        #[arg(long, value_enum, default_value_t = Opponent::Uniform)]
        opponent: Opponent,
        #[arg(long)]
        strategy2: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        runs: usize,
        #[arg(long, default_value_t = 1000)]
        horizon: usize,
    },
    /// Check a strategy or the product against a property.
    Verify {
        game: PathBuf,
        spec: PathBuf,
        #[arg(long, value_enum)]
        check: Check,
        /// P1 strategy file; synthesized when absent.
        #[arg(long)]
        strategy: Option<PathBuf>,
        /// P2 strategy file; synthesized when absent.
        #[arg(long)]
        strategy2: Option<PathBuf>,
        #[arg(long, default_value_t = 6)]
        max_states: usize,
        #[arg(long, default_value_t = 2)]
        max_actions: usize,
        /// Report file; printed to standard output when absent.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Opponent {
    Uniform,
    Ndaswin,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Check {
    Ndaswin,
    Nash,
    ConstantSum,
    MaxRankMinimal,
}

/// Outcome of a subcommand that ran to completion.
enum Status {
    Ok,
    CheckFailed,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let p = dir.join(name);
    fs::write(&p, text).with_context(|| format!("cannot write {}", p.display()))
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

fn load_game(path: &Path) -> Result<ConcurrentGame> {
    let g = ConcurrentGame::from_json_str(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    let problems = g.validate();
    if !problems.is_empty() {
        bail!("{}: {}", path.display(), problems.join("; "));
    }
    Ok(g)
}

fn load_spec(path: &Path) -> Result<PrefSpec> {
    parse_pref_spec(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_product(game: &Path, spec: &Path) -> Result<ProductGame> {
    let g = load_game(game)?;
    let spec = load_spec(spec)?;
    let pa = build_preference_automaton(&spec, g.alphabet())?;
    Ok(build_product(&g, &pa)?)
}

fn load_strategy(path: &Path, h: &ProductGame, owner: Player) -> Result<Strategy> {
    let v: serde_json::Value = serde_json::from_str(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    let s = Strategy::from_json(&v, h.game()).with_context(|| format!("in {}", path.display()))?;
    if s.owner() != owner {
        bail!(
            "{} holds a strategy for {}, expected {owner}",
            path.display(),
            s.owner()
        );
    }
    Ok(s)
}

fn run(cli: Cli) -> Result<Status> {
    match cli.cmd {
        Cmd::Ltlf2dfa { formula, file, ap, out } => {
            let text = match (formula, file) {
                (Some(f), _) => f,
                (None, Some(p)) => read(&p)?.trim().to_string(),
                (None, None) => bail!("give --formula or --file"),
            };
            let ap = ap.map(Alphabet::new);
            let f = parse_ltlf(&text, ap.as_ref())?;
            let ap = ap.unwrap_or_else(|| Alphabet::new(f.atoms()));
            let dfa = to_dfa(&f, &ap)?;
            write(&out, "dfa.json", &pretty(&dfa.to_json()))?;
            write(&out, "dfa.dot", &dfa.to_dot())?;
            println!(
                "states: {}  transitions: {}  accepting: {}",
                dfa.n_states(),
                dfa.n_states() * ap.n_letters(),
                (0..dfa.n_states()).filter(|&q| dfa.is_accepting(q)).count()
            );
        }
        Cmd::Pref2pdfa { spec, ap, out } => {
            let spec = load_spec(&spec)?;
            let ap = ap.map(Alphabet::new).unwrap_or_else(|| spec.atoms());
            let pa = build_preference_automaton(&spec, &ap)?;
            write(&out, "pdfa.json", &pretty(&pa.to_json()))?;
            write(&out, "pdfa.dot", &pa.to_dot())?;
            let ranks = prefgames::rank::compute_ranks(pa.order())?;
            println!("states: {}  kmax: {}", pa.n_states(), ranks.kmax());
            for q in 0..pa.n_states() {
                println!("  q{q} rank {} sat {{{}}}", ranks.rank(q), pa.sat_names(q).join(", "));
            }
        }
        Cmd::Product { game, spec, out } => {
            let h = load_product(&game, &spec)?;
            write(&out, "product.json", &pretty(&h.to_json()))?;
            if let Ok(dot) = h.to_dot() {
                write(&out, "product.dot", &dot)?;
            }
            let csv = rank_csv(h.game().state_names(), h.ranks(Player::One), h.ranks(Player::Two));
            write(&out, "ranks.csv", &csv)?;
            println!(
                "states: {}  k1max: {}  k2max: {}  constant-sum: {}",
                h.n_states(),
                h.kmax(Player::One),
                h.kmax(Player::Two),
                if constant_sum_check(&h) { "holds" } else { "fails" }
            );
        }
        Cmd::Solve {
            game,
            spec,
            player,
            out,
        } => {
            let h = load_product(&game, &spec)?;
            let player = Player::from_number(player)?;
            let res = ndaswin(&h, player);
            let k = res.level.expect("ndaswin sets a level");
            write(&out, "strategy.json", &pretty(&res.to_json(h.game())))?;
            println!(
                "{player}: level k = {k}  region: {}/{}  aswin calls: {}",
                res.region_size(),
                h.n_states(),
                res.telemetry.aswin_calls
            );
            if player == Player::Two {
                // what P2 secures against P1's own synthesized strategy
                let p1 = ndaswin(&h, Player::One);
                let k1 = p1.level.expect("level");
                let mr2 = max_rank(&h, &p1.strategy, &res.strategy, Player::Two)?;
                let expected = h.kmax(Player::Two) as i64 - k1 as i64;
                println!(
                    "P1 level k1 = {k1}  max P2 rank vs P1 = {mr2}  k2max - k1 = {expected}  equal: {}",
                    mr2 as i64 == expected
                );
            }
        }
        Cmd::Rankmap { scenario, spec, out } => {
            let sc =
                GridScenario::from_json_str(&read(&scenario)?).with_context(|| format!("in {}", scenario.display()))?;
            let spec = load_spec(&spec)?;
            let map = rank_map_jobs(&sc, &spec, cli.jobs)?;
            write(&out, "rankmap.csv", &map.to_csv())?;
            print!("{}", map.to_text(&sc));
            for (c, e) in &map.failures {
                eprintln!("cell {c:?} failed: {e}");
            }
        }
        Cmd::Simulate {
            game,
            spec,
            strategy,
            opponent,
            strategy2,
            runs,
            horizon,
        } => {
            let h = load_product(&game, &spec)?;
            if runs == 0 {
                bail!("--runs must be at least 1");
            }
            let (pi1, k) = match strategy {
                Some(p) => (load_strategy(&p, &h, Player::One)?, None),
                None => {
                    let r = ndaswin(&h, Player::One);
                    (r.strategy, r.level)
                }
            };
            let pi2 = match (strategy2, opponent) {
                (Some(p), _) => load_strategy(&p, &h, Player::Two)?,
                (None, Opponent::Uniform) => Strategy::undefined(Player::Two, h.n_states()),
                (None, Opponent::Ndaswin) => ndaswin(&h, Player::Two).strategy,
            };
            let est = estimate_outcomes(&h, &pi1, &pi2, runs, cli.seed, horizon);
            if let Some(k) = k {
                println!("P1 level k = {k}");
            }
            println!(
                "runs: {runs}  seed: {}  not terminated: {}",
                cli.seed, est.non_terminated
            );
            for (r, c) in &est.histogram {
                println!("  rank {r}: {c}");
            }
        }
        Cmd::Verify {
            game,
            spec,
            check,
            strategy,
            strategy2,
            max_states,
            max_actions,
            report,
        } => {
            let h = load_product(&game, &spec)?;
            let bounds = EnumBounds {
                max_states,
                max_actions,
            };
            let instance = game.display().to_string();
            let pi1 = || -> Result<Strategy> {
                Ok(match &strategy {
                    Some(p) => load_strategy(p, &h, Player::One)?,
                    None => ndaswin(&h, Player::One).strategy,
                })
            };
            let pi2 = || -> Result<Strategy> {
                Ok(match &strategy2 {
                    Some(p) => load_strategy(p, &h, Player::Two)?,
                    None => ndaswin(&h, Player::Two).strategy,
                })
            };
            let rep = match check {
                Check::Ndaswin => {
                    let c = verify_ndaswin(&h, &pi1()?, bounds)?;
                    Report::from_check("ndaswin", &instance, &c, h.game())
                }
                Check::Nash => {
                    let (a, b) = (pi1()?, pi2()?);
                    let c = check_nash(&h, &a, &b, bounds)?;
                    let mut rep = Report::from_check("nash", &instance, &c, h.game());
                    if c.holds {
                        let k = ndaswin(&h, Player::One).level.expect("level");
                        if let Ok(g) = opponent_guarantee(&h, &a, &b, k, bounds) {
                            rep.witness = json!({ "p2_guarantee": g });
                        }
                    }
                    rep
                }
                Check::ConstantSum => {
                    let ok = constant_sum_check(&h);
                    let w = match constant_sum_violation(&h) {
                        Some((v, r1, r2)) => json!({
                            "state": h.game().state_name(v),
                            "rank1": r1,
                            "rank2": r2,
                            "k1max": h.kmax(Player::One),
                            "k2max": h.kmax(Player::Two),
                        }),
                        None => serde_json::Value::Null,
                    };
                    Report::new("constant-sum", &instance, ok, w)
                }
                Check::MaxRankMinimal => {
                    let omega = outcome_set(&h, &pi1()?, &pi2()?)?;
                    let ok = max_rank_outcomes_minimal(&h, &omega);
                    let names: Vec<&str> = omega.states.iter().map(|&v| h.game().state_name(v)).collect();
                    Report::new(
                        "max-rank-minimal",
                        &instance,
                        ok,
                        if ok {
                            serde_json::Value::Null
                        } else {
                            json!({ "outcomes": names })
                        },
                    )
                }
            };
            let text = pretty(&rep.to_json());
            match report {
                Some(p) => {
                    fs::write(&p, &text).with_context(|| format!("cannot write {}", p.display()))?;
                    println!("{}: {}", rep.check, if rep.result { "pass" } else { "FAIL" });
                }
                None => print!("{text}"),
            }
            if !rep.result {
                return Ok(Status::CheckFailed);
            }
        }
    }
    Ok(Status::Ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
