import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adcrates.adc import AdcParams
from adcrates.cir import CirParams, conditional_moments, stationary_cdf
from adcrates.mc import (
    Histogram,
    Histogram2D,
    Model1,
    SimConfig,
    comparison_sum_check,
    draw_normals,
    empirical_distribution,
    fd_edges,
    hitting_probability,
    price_both_legs_mc,
    price_curve_mc,
    price_zcb_mc,
    resolving_step,
    simpson,
    simulate,
    step_normals,
)
from adcrates.pricing import Leg, model1_curves, zcb_price_cir
from adcrates.verification import REFERENCE_MODEL1, REFERENCE_MODEL2

from conftest import RISK_FREE, SPREAD


def _rows(path):
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.reader(lines))


@given(horizon=st.floats(0.1, 40.0), h=st.floats(1e-3, 0.05))
def test_config_normalizes_to_even_steps_without_enlarging(horizon, h):
    cfg = SimConfig(horizon, h)
    assert cfg.n_steps % 2 == 0 and cfg.n_steps >= 2
    assert cfg.step_h <= h * (1 + 1e-12)
    assert cfg.n_steps * cfg.step_h == pytest.approx(horizon, rel=1e-12)


def test_config_defaults_and_errors():
    cfg = SimConfig(30.0)
    assert (cfg.step_h, cfg.n_paths, cfg.boundary_delta) == (0.004, 5000, 1e-6)
    assert cfg.n_steps == 7500
    assert SimConfig(1.0, 0.4).step_h == 0.25
    for bad in ({"horizon": 0.0}, {"horizon": -1.0}, {"horizon": 1.0, "step_h": 0.0},
                {"horizon": 1.0, "n_paths": 0}, {"horizon": 1.0, "boundary_delta": -1.0}):
        with pytest.raises(ValueError):
            SimConfig(**bad)


def test_step_index_rejects_off_grid_times():
    cfg = SimConfig(1.0, 0.01)
    assert cfg.step_index(0.5) == 50
    with pytest.raises(ValueError):
        cfg.step_index(0.505)


def test_normals_are_prefix_stable_in_path_count():
    a = step_normals(3, 17, 100)
    b = step_normals(3, 17, 1000)
    assert np.array_equal(a, b[:100])
    assert not np.array_equal(step_normals(3, 18, 100), a)
    assert not np.array_equal(step_normals(4, 17, 100), a)


def test_paths_do_not_depend_on_path_count():
    small = simulate(REFERENCE_MODEL2, SimConfig(1.0, 0.01, 50, 9))
    big = simulate(REFERENCE_MODEL2, SimConfig(1.0, 0.01, 400, 9))
    assert np.array_equal(small.states, big.states[:50])


def test_deterministic_ode():
    tiny = 1e-12
    m = Model1(CirParams(0.3, 0.05, tiny, 0.02), CirParams(1.2, 0.01, tiny, 0.03))
    batch = simulate(m, SimConfig(10.0, 0.004, 4, 0), record_every=2500)
    for k, f in enumerate((m.r, m.s)):
        exact = f.theta + (f.x0 - f.theta) * math.exp(-f.kappa * 10.0)
        assert np.all(np.abs(batch.samples(10.0, "rs"[k]) - exact) < 5e-4)


def test_degenerate_adc_is_bitwise_model1():
    cfg = SimConfig(2.0, 0.004, 300, 5)
    a = simulate(REFERENCE_MODEL1, cfg)
    b = simulate(REFERENCE_MODEL1.degenerate_adc(), cfg)
    assert np.array_equal(a.states, b.states)
    assert np.array_equal(a.hit_flags, b.hit_flags)


def test_terminal_mean_matches_conditional_mean():
    T = 5.0
    batch = simulate(REFERENCE_MODEL1, SimConfig(T, 0.004, 100_000, 1), record_every=1250)
    r = batch.samples(T, "r")
    mean, _ = conditional_moments(RISK_FREE, T)
    assert mean == pytest.approx(RISK_FREE.x0 * math.exp(-RISK_FREE.kappa * T)
                                 + RISK_FREE.theta * (1 - math.exp(-RISK_FREE.kappa * T)))
    assert abs(r.mean() - mean) < 3 * r.std(ddof=1) / math.sqrt(r.size)


def test_states_are_nonnegative_and_seed_deterministic():
    p = AdcParams(CirParams(0.125, 0.02, 0.1, 0.005), CirParams(0.5, 0.01, 0.2, 0.001), 0.3, 0.3, -0.2)
    cfg = SimConfig(3.0, 0.01, 500, 2)
    a = simulate(p, cfg)
    b = simulate(p, cfg)
    assert np.all(a.states >= 0.0)
    assert np.array_equal(a.states, b.states) and np.array_equal(a.hit_flags, b.hit_flags)
    assert price_zcb_mc(p, cfg, 3.0, "risky") == price_zcb_mc(p, cfg, 3.0, "risky")


def test_deterministic_price():
    k, th, r0, T = 0.1, 0.05, 0.03, 10.0
    exact = math.exp(-(th * T + (r0 - th) * (1 - math.exp(-k * T)) / k))
    assert exact == pytest.approx(0.68826, abs=1e-5)
    p = CirParams(k, th, 1e-12, r0)
    got = price_zcb_mc(p, SimConfig(T, 1e-4, 2, 0), T)
    assert got.value == pytest.approx(exact, abs=1e-6)
    assert got.std_error < 1e-10


def test_zero_maturity_price_is_one():
    got = price_zcb_mc(REFERENCE_MODEL1, SimConfig(1.0, 0.01, 100, 0), 0.0, Leg.RISKY)
    assert got.value == 1.0 and got.std_error == 0.0


def test_pricing_rejects_bad_maturities():
    cfg = SimConfig(1.0, 0.01, 10, 0)
    with pytest.raises(ValueError):
        price_zcb_mc(RISK_FREE, cfg, 2.0)
    with pytest.raises(ValueError):
        price_zcb_mc(RISK_FREE, cfg, 0.01)  # one step: odd interval count
    with pytest.raises(ValueError):
        price_zcb_mc(RISK_FREE, cfg, 0.5, Leg.RISKY)


@given(c=st.lists(st.floats(-10, 10), min_size=4, max_size=4), n=st.integers(1, 50))
def test_simpson_exact_on_cubics(c, n):
    t = np.linspace(0.0, 2.0, 2 * n + 1)
    poly = np.polynomial.Polynomial(c)
    exact = poly.integ()(2.0) - poly.integ()(0.0)
    assert simpson(poly(t), t[1] - t[0]) == pytest.approx(exact, abs=1e-12 * (1 + np.abs(c).sum()))


def test_common_random_numbers_match_streamed_normals():
    cfg = SimConfig(2.0, 0.01, 200, 4)
    z = draw_normals(cfg)
    a = price_curve_mc(REFERENCE_MODEL1, cfg, [1.0, 2.0])
    b = price_curve_mc(REFERENCE_MODEL1, cfg, [1.0, 2.0], normals=z)
    assert a == b


def test_both_legs_agree_with_single_leg_calls():
    cfg = SimConfig(2.0, 0.01, 200, 4)
    d, i = price_both_legs_mc(REFERENCE_MODEL1, cfg, [2.0])
    assert d[0] == price_zcb_mc(REFERENCE_MODEL1, cfg, 2.0)
    assert i[0] == price_zcb_mc(REFERENCE_MODEL1, cfg, 2.0, "risky")
    assert i[0].value < d[0].value


def test_std_error_scales_as_inverse_root_n():
    se = [price_zcb_mc(RISK_FREE, SimConfig(5.0, 0.004, n, 0), 5.0).std_error for n in (5000, 20000, 80000)]
    assert se[0] / se[1] == pytest.approx(2.0, rel=0.1)
    assert se[1] / se[2] == pytest.approx(2.0, rel=0.1)


def test_weak_convergence_in_step_size():
    exact = zcb_price_cir(RISK_FREE, RISK_FREE.x0, 10.0)
    errs = []
    for h in (0.016, 0.008, 0.004):
        p = price_zcb_mc(RISK_FREE, SimConfig(10.0, h, 20000, 1), 10.0)
        errs.append((abs(p.value - exact), p.std_error))
    for (e1, _), (e2, s2) in zip(errs, errs[1:]):
        assert e2 <= e1 + 2 * s2


def test_degenerate_prices_near_closed_form_on_short_grid():
    tenors = np.arange(1.0, 6.0)
    d, i = price_both_legs_mc(REFERENCE_MODEL1.degenerate_adc(), SimConfig(5.0, 0.004, 5000, 0), tenors)
    de, it = model1_curves(RISK_FREE, SPREAD, tenors)
    assert np.max(np.abs(-np.log([x.value for x in d]) / tenors - de)) * 1e4 <= 5.0
    assert np.max(np.abs(-np.log([x.value for x in i]) / tenors - it)) * 1e4 <= 5.0


def test_resolving_step():
    assert resolving_step(RISK_FREE, 1e-6) == pytest.approx(1e-6 / RISK_FREE.sigma**2)
    assert resolving_step(RISK_FREE, 0.0) == 0.004
    assert resolving_step(CirParams(0.1, 0.05, 0.001, 0.05), 1e-6) == 0.004
    assert resolving_step(REFERENCE_MODEL2, 1e-6) == pytest.approx(1e-6 / 0.0423**2)


def test_hitting_small_sample():
    low = CirParams(0.125, 0.02, 0.1, 0.005)
    est = hitting_probability(low, SimConfig(5.0, 1e-4, 1000, 0))
    assert est.significantly_positive()
    assert est.std_error == pytest.approx(math.sqrt(est.probability * (1 - est.probability) / 1000))
    high = CirParams(1.0, 0.05, 0.1, 0.05)  # nu = 10
    assert hitting_probability(high, SimConfig(5.0, 1e-4, 1000, 0)).n_hits == 0


def test_simulate_tracks_hits_like_hitting_probability():
    low = CirParams(0.125, 0.02, 0.1, 0.005)
    cfg = SimConfig(2.0, 1e-3, 500, 3)
    assert simulate(low, cfg, record_every=1000).hit_flags.sum() == hitting_probability(low, cfg).n_hits


def test_empirical_distribution_masses_and_errors():
    batch = simulate(REFERENCE_MODEL2, SimConfig(1.0, 0.01, 2000, 0), record_every=10)
    for comp in ("r", "s"):
        h = empirical_distribution(batch, 1.0, comp)
        assert isinstance(h, Histogram)
        assert math.fsum(h.masses) == pytest.approx(1.0, abs=1e-12)
    j = empirical_distribution(batch, 1.0, "joint")
    assert isinstance(j, Histogram2D)
    assert math.fsum(j.masses.ravel()) == pytest.approx(1.0, abs=1e-12)
    assert j.masses.shape[0] <= 200 and j.masses.shape[1] <= 200
    with pytest.raises(ValueError):
        empirical_distribution(batch, 0.55, "r")
    with pytest.raises(ValueError):
        empirical_distribution(batch, 1.0, "q")


def test_fd_edges_capped():
    x = np.random.default_rng(0).standard_cauchy(100_000)
    assert fd_edges(x).size - 1 == 200


def test_spread_factor_stationary_by_year_five():
    T = 5.0
    batch = simulate(REFERENCE_MODEL1, SimConfig(T, 0.004, 100_000, 0), record_every=1250)
    from adcrates.mc import ks_test
    res = ks_test(batch.samples(T, "s"), lambda v: stationary_cdf(SPREAD, v))
    assert res.passed, res


def test_comparison_single_factor_and_errors():
    f = CirParams(0.5, 0.02, 0.1, 0.02)  # nu = 2
    rep = comparison_sum_check([f], SimConfig(2.0, 0.002, 20_000, 0))
    assert rep.ks.passed
    assert rep.reference.sigma == 1.0 and rep.reference.theta == pytest.approx(f.nu / 1.0)
    with pytest.raises(ValueError):
        comparison_sum_check([f, CirParams(0.6, 0.02, 0.2, 0.02)], SimConfig(1.0, 0.01, 10, 0))
    with pytest.raises(ValueError):
        comparison_sum_check([], SimConfig(1.0, 0.01, 10, 0))


def test_comparison_mass_near_zero_when_sum_below_one():
    def factor(nu):
        return CirParams(0.5, 0.02, math.sqrt(2 * 0.5 * 0.02 / nu), 0.02)

    rep = comparison_sum_check([factor(0.4), factor(0.4)], SimConfig(0.5, 1e-3, 20_000, 0))
    assert rep.near_zero_empirical > 0.0 and rep.near_zero_law > 0.0


def test_csv_exports(tmp_path):
    batch = simulate(REFERENCE_MODEL1, SimConfig(0.04, 0.01, 3, 0))
    batch.to_csv(tmp_path / "p.csv", ["adcrates test"])
    rows = _rows(tmp_path / "p.csv")
    assert rows[0] == ["path", "step", "t", "r", "s"]
    assert len(rows) == 1 + 3 * 5
    assert (tmp_path / "p.csv").read_text().startswith("# adcrates test\n")
    empirical_distribution(batch, 0.04, "r").to_csv(tmp_path / "h.csv")
    assert _rows(tmp_path / "h.csv")[0] == ["bin_lo", "bin_hi", "mass"]
    empirical_distribution(batch, 0.04, "joint").to_csv(tmp_path / "j.csv")
    assert _rows(tmp_path / "j.csv")[0] == ["r_lo", "r_hi", "s_lo", "s_hi", "mass"]


def test_initial_states_broadcast_and_validate():
    cfg = SimConfig(0.01, 0.005, 4, 0)
    batch = simulate(REFERENCE_MODEL2, cfg, initial=(np.array([0.01, 0.02, 0.03, 0.04]), 0.001))
    assert batch.states[:, 0, 0].tolist() == [0.01, 0.02, 0.03, 0.04]
    assert np.all(batch.states[:, 0, 1] == 0.001)
    with pytest.raises(ValueError):
        simulate(REFERENCE_MODEL2, cfg, initial=(-0.01, 0.001))
