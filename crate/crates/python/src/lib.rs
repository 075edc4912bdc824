//! Python bindings: formulas to automata, preference automata, product
//! games, synthesis, checks and gridworld rank maps.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use prefgames::analysis::{self, EnumBounds};
use prefgames::game::{ConcurrentGame, Player, Strategy};
use prefgames::gridworld::{rank_map_jobs, GridScenario};
use prefgames::ltlf::{self, Alphabet, Letter};
use prefgames::preference::{self, parse_pref_spec};
use prefgames::product::{build_product, ProductGame};
use prefgames::rank::compute_ranks;
use prefgames::solver;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn player(n: u8) -> PyResult<Player> {
    Player::from_number(n).map_err(err)
}

fn alphabet(ap: Option<Vec<String>>, f: &ltlf::Formula) -> Alphabet {
    ap.map(Alphabet::new).unwrap_or_else(|| Alphabet::new(f.atoms()))
}

fn word(ap: &Alphabet, w: Vec<Vec<String>>) -> PyResult<Vec<Letter>> {
    w.iter().map(|l| ap.letter(l).map_err(err)).collect()
}

#[pyclass(name = "Dfa", frozen)]
struct PyDfa {
    inner: ltlf::Dfa,
}

#[pymethods]
impl PyDfa {
    #[getter]
    fn n_states(&self) -> usize {
        self.inner.n_states()
    }

    /// `word` is a list of letters, each a list of true propositions.
    fn accepts(&self, word_: Vec<Vec<String>>) -> PyResult<bool> {
        Ok(self.inner.accepts(&word(self.inner.alphabet(), word_)?))
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    fn to_dot(&self) -> String {
        self.inner.to_dot()
    }
}

#[pyfunction]
#[pyo3(signature = (formula, ap=None))]
fn ltlf_to_dfa(formula: &str, ap: Option<Vec<String>>) -> PyResult<PyDfa> {
    let f = ltlf::parse_ltlf(formula, None).map_err(err)?;
    let ap = alphabet(ap, &f);
    Ok(PyDfa {
        inner: ltlf::to_dfa(&f, &ap).map_err(err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (formula, word_, ap=None))]
fn eval_ltlf(formula: &str, word_: Vec<Vec<String>>, ap: Option<Vec<String>>) -> PyResult<bool> {
    let f = ltlf::parse_ltlf(formula, None).map_err(err)?;
    let ap = alphabet(ap, &f);
    ltlf::eval_word(&f, &ap, &word(&ap, word_)?).map_err(err)
}

#[pyclass(name = "PreferenceAutomaton", frozen)]
struct PyPreferenceAutomaton {
    inner: preference::PreferenceAutomaton,
}

#[pymethods]
impl PyPreferenceAutomaton {
    #[getter]
    fn n_states(&self) -> usize {
        self.inner.n_states()
    }

    fn ranks(&self) -> PyResult<Vec<usize>> {
        Ok(compute_ranks(self.inner.order()).map_err(err)?.ranks().to_vec())
    }

    fn sat(&self, q: usize) -> PyResult<Vec<String>> {
        if q >= self.inner.n_states() {
            return Err(err(format!("no automaton state {q}")));
        }
        Ok(self.inner.sat_names(q))
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }
}

#[pyfunction]
#[pyo3(signature = (spec, ap=None))]
fn preference_automaton(spec: &str, ap: Option<Vec<String>>) -> PyResult<PyPreferenceAutomaton> {
    let spec = parse_pref_spec(spec).map_err(err)?;
    let ap = ap.map(Alphabet::new).unwrap_or_else(|| spec.atoms());
    Ok(PyPreferenceAutomaton {
        inner: preference::build_preference_automaton(&spec, &ap).map_err(err)?,
    })
}

#[pyclass(name = "Product", frozen)]
struct PyProduct {
    inner: ProductGame,
}

impl PyProduct {
    fn strategy(&self, json: Option<&str>, owner: Player) -> PyResult<Strategy> {
        match json {
            Some(text) => {
                let v: serde_json::Value = serde_json::from_str(text).map_err(err)?;
                Strategy::from_json(&v, self.inner.game()).map_err(err)
            }
            None => Ok(solver::ndaswin(&self.inner, owner).strategy),
        }
    }
}

#[pymethods]
impl PyProduct {
    #[getter]
    fn n_states(&self) -> usize {
        self.inner.n_states()
    }

    fn ranks(&self, player_: u8) -> PyResult<Vec<usize>> {
        Ok(self.inner.ranks(player(player_)?).ranks().to_vec())
    }

    fn kmax(&self, player_: u8) -> PyResult<usize> {
        Ok(self.inner.kmax(player(player_)?))
    }

    fn constant_sum(&self) -> bool {
        analysis::constant_sum_check(&self.inner)
    }

    /// Returns `(level, strategy_json)`.
    #[pyo3(signature = (player_=1))]
    fn solve(&self, player_: u8) -> PyResult<(usize, String)> {
        let res = solver::ndaswin(&self.inner, player(player_)?);
        let k = res.level.expect("ndaswin sets a level");
        Ok((k, res.to_json(self.inner.game()).to_string()))
    }

    /// Runs `check` (`ndaswin`, `nash`, `max-rank-minimal`, `constant-sum`)
    /// and returns `(holds, report_json)`. Missing strategies are synthesized.
    #[pyo3(signature = (check, strategy=None, strategy2=None, max_states=6, max_actions=2))]
    fn verify(
        &self,
        check: &str,
        strategy: Option<&str>,
        strategy2: Option<&str>,
        max_states: usize,
        max_actions: usize,
    ) -> PyResult<(bool, String)> {
        let h = &self.inner;
        let bounds = EnumBounds {
            max_states,
            max_actions,
        };
        let rep = match check {
            "ndaswin" => {
                let c = analysis::verify_ndaswin(h, &self.strategy(strategy, Player::One)?, bounds).map_err(err)?;
                analysis::Report::from_check(check, "python", &c, h.game())
            }
            "nash" => {
                let (a, b) = (
                    self.strategy(strategy, Player::One)?,
                    self.strategy(strategy2, Player::Two)?,
                );
                let c = analysis::check_nash(h, &a, &b, bounds).map_err(err)?;
                analysis::Report::from_check(check, "python", &c, h.game())
            }
            "max-rank-minimal" => {
                let (a, b) = (
                    self.strategy(strategy, Player::One)?,
                    self.strategy(strategy2, Player::Two)?,
                );
                let omega = analysis::outcome_set(h, &a, &b).map_err(err)?;
                let ok = analysis::max_rank_outcomes_minimal(h, &omega);
                analysis::Report::new(check, "python", ok, serde_json::Value::Null)
            }
            "constant-sum" => analysis::Report::new(
                check,
                "python",
                analysis::constant_sum_check(h),
                serde_json::Value::Null,
            ),
            other => return Err(err(format!("unknown check {other:?}"))),
        };
        Ok((rep.result, rep.to_json().to_string()))
    }

    /// Histogram of P1 ranks at the stop state as `{rank: count}`, plus the
    /// number of runs cut by the horizon.
    #[pyo3(signature = (runs=1000, seed=0, horizon=1000, strategy=None, strategy2=None))]
    fn simulate(
        &self,
        runs: usize,
        seed: u64,
        horizon: usize,
        strategy: Option<&str>,
        strategy2: Option<&str>,
    ) -> PyResult<(std::collections::BTreeMap<usize, usize>, usize)> {
        let pi1 = self.strategy(strategy, Player::One)?;
        let pi2 = match strategy2 {
            Some(_) => self.strategy(strategy2, Player::Two)?,
            None => Strategy::undefined(Player::Two, self.inner.n_states()),
        };
        let est = analysis::estimate_outcomes(&self.inner, &pi1, &pi2, runs, seed, horizon);
        Ok((est.histogram, est.non_terminated))
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }
}

#[pyfunction]
fn product(game_json: &str, spec: &str) -> PyResult<PyProduct> {
    let g = ConcurrentGame::from_json_str(game_json).map_err(err)?;
    let spec = parse_pref_spec(spec).map_err(err)?;
    let pa = preference::build_preference_automaton(&spec, g.alphabet()).map_err(err)?;
    Ok(PyProduct {
        inner: build_product(&g, &pa).map_err(err)?,
    })
}

/// Rank level per cell, `-1` for cells A may not start from.
#[pyfunction]
#[pyo3(signature = (scenario_json, spec, jobs=1))]
fn rank_map(py: Python<'_>, scenario_json: &str, spec: &str, jobs: usize) -> PyResult<Vec<Vec<i64>>> {
    let sc = GridScenario::from_json_str(scenario_json).map_err(err)?;
    let spec = parse_pref_spec(spec).map_err(err)?;
    let map = py.detach(|| rank_map_jobs(&sc, &spec, jobs)).map_err(err)?;
    if let Some((c, e)) = map.failures.first() {
        return Err(err(format!("cell {c:?}: {e}")));
    }
    Ok(map.grid)
}

#[pymodule]
fn prefgames_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDfa>()?;
    m.add_class::<PyPreferenceAutomaton>()?;
    m.add_class::<PyProduct>()?;
    m.add_function(wrap_pyfunction!(ltlf_to_dfa, m)?)?;
    m.add_function(wrap_pyfunction!(eval_ltlf, m)?)?;
    m.add_function(wrap_pyfunction!(preference_automaton, m)?)?;
    m.add_function(wrap_pyfunction!(product, m)?)?;
    m.add_function(wrap_pyfunction!(rank_map, m)?)?;
    Ok(())
}
