from __future__ import annotations

import dataclasses
import math

import pytest

from semcom.channel import ChannelModel, Exact, KOfN, success_prob
from semcom.errors import ConfigError
from semcom.scenarios import default_config, plan_order, run_crossword
from semcom.scenarios.crossword import Crossing, CrosswordConfig, CrosswordQuery, analytic_letters


@pytest.fixture(scope="module")
def cfg() -> CrosswordConfig:
    return default_config("crossword")


@pytest.fixture(scope="module")
def result(cfg):
    return run_crossword(cfg)


def _letters(result, order, eps):
    return next(r for r in result.letters if r.order == order and math.isclose(r.epsilon, eps))


def test_default_config_shape(cfg):
    assert [q.answer for q in cfg.queries] == ["APPLE", "PORK", "ICE"]
    assert [q.threshold for q in cfg.queries] == [3, 2, 3]
    assert len(cfg.epsilon_grid) == 51 and cfg.epsilon_grid[29] == 0.29
    assert cfg.trials == 10_000


def test_plans(cfg):
    plans = [plan_order(cfg, o) for o in cfg.orders]
    sent = [[(s.query, s.letters) for s in p if s.letters] for p in plans]
    assert sent == [[("one", "APPLE"), ("three", "IC")],
                    [("two", "PORK"), ("three", "IC")],
                    [("three", "ICE")]]
    assert plans[0][2].decoder == Exact()
    assert plans[1][0].decoder == KOfN(2)


def test_all_six_orders(cfg):
    import itertools
    totals = {o: sum(len(s.letters) for s in plan_order(cfg, list(o)))
              for o in itertools.permutations(["one", "two", "three"])}
    assert totals[("one", "three", "two")] == 7
    assert totals[("two", "three", "one")] == 6
    assert totals[("three", "two", "one")] == 3
    assert max(totals.values()) < 9  # the knowledge base always saves something


def test_error_free_totals(result):
    for order, expected in [(1, 7.0), (2, 6.0), (3, 3.0)]:
        r = _letters(result, order, 0.0)
        assert r.analytic_letters == expected and r.mc_letters == expected and r.mc_stderr == 0


def test_order_three_closed_form(result):
    for r in result.letters:
        if r.order == 3:
            assert r.analytic_letters == pytest.approx(3 / (1 - r.epsilon) ** 3, rel=1e-12)


def test_crossover(result):
    first = next(e for e in sorted({r.epsilon for r in result.letters})
                 if _letters(result, 2, e).analytic_letters < _letters(result, 3, e).analytic_letters)
    assert 0.28 <= first <= 0.29


def test_monte_carlo_within_three_sigma(result):
    misses = [r for r in result.letters
              if abs(r.mc_letters - r.analytic_letters) > 3 * r.mc_stderr + 1e-12]
    # 150 non-trivial points: a handful of chance excursions would still be plausible
    assert len(misses) <= 2, misses


def test_decode_error_curves(result):
    for r in result.decode_errors:
        ch = ChannelModel(26, r.epsilon)
        e = r.epsilon
        expected = {
            "one": 1 - success_prob(ch, 5, KOfN(3)),
            "two": 1 - success_prob(ch, 4, KOfN(2)),
            "three": 1 - (1 - e) ** 3,
        }[r.query]
        assert r.error_prob == pytest.approx(expected, abs=1e-12)
    at = {r.query: r.error_prob for r in result.decode_errors if r.epsilon == 0.2}
    assert at["one"] == pytest.approx(0.05792, abs=1e-9)


def test_deterministic(cfg):
    small = dataclasses.replace(cfg, trials=300, epsilon_grid=[0.1, 0.3])
    assert run_crossword(small).letters == run_crossword(small).letters
    other = dataclasses.replace(small, seed=5)
    assert run_crossword(other).letters != run_crossword(small).letters


def test_analytic_letters(cfg):
    plan = plan_order(cfg, ["one", "two", "three"])
    ch = ChannelModel(26, 0.29)
    expected = 5 / success_prob(ch, 5, KOfN(3)) + 2 / 0.71 ** 2
    assert analytic_letters(plan, ch) == pytest.approx(expected)


@pytest.mark.parametrize("change,match", [
    (lambda d: d["queries"][0].update(threshold=6), "threshold"),
    (lambda d: d["queries"][0].update(answer="apple"), "upper-case"),
    (lambda d: d.update(crossings=[["one", 0, "three", 0]]), "disagree"),
    (lambda d: d.update(orders=[["one", "four"]]), "order"),
    (lambda d: d.update(epsilon_grid=[1.0]), "crossover"),
])
def test_config_errors(change, match):
    import json
    from importlib import resources
    data = json.loads(resources.files("semcom.scenarios").joinpath("data", "crossword.json")
                      .read_text())
    change(data)
    with pytest.raises(ConfigError, match=match):
        CrosswordConfig.from_dict(data)


def test_query_validation():
    with pytest.raises(ConfigError):
        CrosswordQuery("x", "ICE", 0)
    assert Crossing("one", 4, "three", 2).pos_b == 2
