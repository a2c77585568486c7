import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adcrates.optimize import AnnealingSchedule, coordinate_search, golden_section, simulated_annealing


@given(c=st.floats(-5, 5))
def test_golden_section_finds_parabola_minimum(c):
    x, fx, n = golden_section(lambda t: (t - c) ** 2, -10.0, 10.0, tol=1e-12)
    assert x == pytest.approx(c, abs=1e-6)
    assert n <= 200


def test_golden_section_at_interval_edge():
    x, _, _ = golden_section(lambda t: t, 1.0, 2.0)
    assert x == pytest.approx(1.0, abs=1e-9)


def test_coordinate_search_quadratic_bowl():
    target = np.array([0.3, -1.2, 2.0])
    res = coordinate_search(lambda x: float(np.sum((x - target) ** 2)), [0, 0, 0], [-5] * 3, [5] * 3)
    assert res.converged
    assert np.allclose(res.x, target, atol=1e-5)
    assert all(a >= b for a, b in zip(res.history, res.history[1:]))


def test_coordinate_search_respects_box():
    res = coordinate_search(lambda x: float(np.sum(x)), [0.5, 0.5], [0, 0], [1, 1])
    assert np.all(res.x >= 0) and res.fun == pytest.approx(0.0, abs=1e-8)


@given(budget=st.integers(1, 200))
def test_searches_stay_within_budget(budget):
    calls = []

    def f(x):
        calls.append(1)
        return float(np.sum((x - 0.3) ** 2))

    lo, hi = np.zeros(4), np.ones(4)
    res = coordinate_search(f, np.full(4, 0.9), lo, hi, tol=0.0, max_evals=budget)
    assert res.n_evals == len(calls) <= max(budget, 1)
    calls.clear()
    sa = simulated_annealing(f, np.full(4, 0.9), lo, hi, AnnealingSchedule(), np.random.default_rng(0),
                             max_evals=budget)
    assert sa.n_evals == len(calls) <= budget


def test_schedule_validation():
    with pytest.raises(ValueError):
        AnnealingSchedule(decay=1.0)
    with pytest.raises(ValueError):
        AnnealingSchedule(decay=0.0)
    with pytest.raises(ValueError):
        AnnealingSchedule(steps_per_stage=0)


def rastrigin(x):
    return float(10 * x.size + np.sum(x**2 - 10 * np.cos(2 * np.pi * x)))


def test_annealing_best_ever_and_trace():
    seen = []

    def f(x):
        seen.append(x.copy())
        return rastrigin(x)

    lo, hi = np.full(3, -5.12), np.full(3, 5.12)
    res = simulated_annealing(f, [3.0, -3.0, 2.0], lo, hi, AnnealingSchedule(), np.random.default_rng(0),
                              max_evals=3000)
    assert res.n_evals == len(seen) == 3000
    assert res.fun == min(rastrigin(x) for x in seen)
    assert res.fun <= res.start_fun
    assert all(a >= b for a, b in zip(res.trace.best, res.trace.best[1:]))
    assert res.trace.accepted + res.trace.rejected == 2999
    assert all(np.all(x >= lo) and np.all(x <= hi) for x in seen)
    assert res.trace.temperatures[0] == res.start_fun


def test_annealing_escapes_local_minima():
    lo, hi = np.full(2, -5.12), np.full(2, 5.12)
    res = simulated_annealing(rastrigin, [4.0, 4.0], lo, hi, AnnealingSchedule(width=0.5),
                              np.random.default_rng(1), max_evals=6000)
    assert res.fun < rastrigin(np.array([4.0, 4.0])) / 4


def test_annealing_is_seed_deterministic():
    args = (rastrigin, [1.0, 2.0], [-5, -5], [5, 5], AnnealingSchedule())
    a = simulated_annealing(*args, np.random.default_rng(3), max_evals=500)
    b = simulated_annealing(*args, np.random.default_rng(3), max_evals=500)
    assert np.array_equal(a.x, b.x) and a.trace == b.trace


def test_annealing_reanneals_when_stuck():
    res = simulated_annealing(lambda x: 1.0, [0.0], [-1], [1], AnnealingSchedule(steps_per_stage=5,
                              reanneal_after=2), np.random.default_rng(0), max_evals=200)
    assert res.trace.reanneals > 0
    t0 = res.trace.temperatures[0]
    assert any(math.isclose(t, t0 / 10) for t in res.trace.temperatures)


def test_annealing_stops_at_tolerance():
    res = simulated_annealing(lambda x: float(abs(x[0])), [0.5], [-1], [1], AnnealingSchedule(),
                              np.random.default_rng(0), max_evals=10_000, tol=1e-3)
    assert res.converged and res.fun <= 1e-3 and res.n_evals < 10_000


def test_proposal_scales():
    seen = []

    def f(x):
        seen.append(x.copy())
        return 1.0

    simulated_annealing(f, [0.5, 0.5], [0, 0], [1, 1], AnnealingSchedule(width=1.0),
                        np.random.default_rng(0), max_evals=50, scales=[1e-3, 0.0])
    steps = np.abs(np.diff(np.array(seen), axis=0))
    assert steps[:, 0].max() <= 2e-3 + 1e-15 and steps[:, 1].max() == 0.0
