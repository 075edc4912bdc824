"""Smoke test for the prefgames_py extension module."""

import json
import pathlib

import prefgames_py as pg

DATA = pathlib.Path(__file__).resolve().parents[3] / "data"


def main():
    dfa = pg.ltlf_to_dfa("F d1 & G !o")
    assert dfa.n_states == 3
    assert dfa.accepts([[], ["d1"]])
    assert not dfa.accepts([["o"], ["d1"]])
    assert pg.eval_ltlf("a U b", [["a"], ["b"]]) is True

    pa = pg.preference_automaton((DATA / "delivery.pref").read_text())
    assert max(pa.ranks()) == 3

    h = pg.product((DATA / "tiny_game.json").read_text(), (DATA / "tiny.pref").read_text())
    assert h.constant_sum()
    k, strategy = h.solve(1)
    assert k == 0
    assert json.loads(strategy)["level_k"] == 0
    for check in ["ndaswin", "nash", "max-rank-minimal", "constant-sum"]:
        ok, report = h.verify(check)
        assert ok, report
    hist, cut = h.simulate(runs=200, seed=1)
    assert hist == {0: 200} and cut == 0

    bad = pg.product((DATA / "counterexample_game.json").read_text(), (DATA / "tiny.pref").read_text())
    ok, report = bad.verify("ndaswin")
    assert not ok and json.loads(report)["witness"]["reason"]

    grid = pg.rank_map((DATA / "gridworld_3x3_noslip.json").read_text(), (DATA / "delivery1.pref").read_text())
    assert grid == [[0, -1, -1], [0, -1, 0], [-1, 1, 0]]

    try:
        pg.ltlf_to_dfa("F (p &")
    except ValueError:
        pass
    else:
        raise AssertionError("parse error not raised")
    print("python smoke: ok")


if __name__ == "__main__":
    main()
