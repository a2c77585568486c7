import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adcrates.cir import CirParams
from adcrates.pricing import (
    Leg,
    bond_coeffs,
    brown_dybvig,
    cir_bond_coeffs,
    model1_curves,
    price_from_rate,
    zcb_price_cir,
    zcb_price_model1,
    zero_rate,
)

from conftest import RISK_FREE, SPREAD

params = st.builds(CirParams, kappa=st.floats(0.01, 5.0), theta=st.floats(0.001, 0.15),
                   sigma=st.floats(0.01, 0.4), x0=st.floats(0.0005, 0.15))


def textbook_price(p, r, tau, dps=50):
    """Brown-Dybvig closed form evaluated in arbitrary precision."""
    with mp.workdps(dps):
        k, th, s = mp.mpf(p.kappa), mp.mpf(p.theta), mp.mpf(p.sigma)
        tau = mp.mpf(tau)
        d = mp.sqrt(k * k + 2 * s * s)
        phi = (d + k) / 2
        e = mp.expm1(d * tau)
        den = phi * e + d
        f = (d * mp.exp(phi * tau) / den) ** (2 * k * th / s**2)
        g = e / den
        return f * mp.exp(-g * mp.mpf(r))


def test_brown_dybvig_examples():
    assert brown_dybvig(0.3, 0.0) == (0.3, 0.3)
    d, phi = brown_dybvig(RISK_FREE)
    assert d == pytest.approx(0.075661, abs=1e-6)
    assert phi == pytest.approx(0.057731, abs=1e-6)
    assert brown_dybvig(0.0, math.sqrt(0.5)) == pytest.approx((1.0, 0.5), rel=1e-15)


@given(p=params)
def test_brown_dybvig_invariants(p):
    d, phi = brown_dybvig(p)
    assert d >= p.kappa and p.kappa <= phi <= d


def test_zero_maturity():
    log_f, g = cir_bond_coeffs(RISK_FREE, 0.0)
    assert log_f == 0.0 and g == 0.0
    assert zcb_price_cir(RISK_FREE, 0.05, 0.0) == 1.0


def test_short_rate_limit():
    tau = 1e-6
    _, g = cir_bond_coeffs(RISK_FREE, tau)
    assert g == pytest.approx(tau, rel=1e-6)
    y = -math.log(zcb_price_cir(RISK_FREE, 0.0346, tau)) / tau
    assert y == pytest.approx(0.0346, rel=1e-6)


@pytest.mark.parametrize("tau", [1e-6, 0.5, 1.0, 10.0, 30.0, 120.0, 500.0])
@pytest.mark.parametrize("p", [RISK_FREE, SPREAD], ids=["risk_free", "spread"])
def test_matches_arbitrary_precision(p, tau):
    ours = zcb_price_cir(p, p.x0, tau)
    ref = textbook_price(p, p.x0, tau)
    assert ours == pytest.approx(float(ref), rel=1e-14)


def test_reference_zero_rate_band():
    price = zcb_price_cir(RISK_FREE, 0.0346, 10.0)
    assert price == pytest.approx(float(textbook_price(RISK_FREE, 0.0346, 10.0)), rel=1e-15)
    assert 0.03 <= -math.log(price) / 10.0 <= 0.06


def test_no_overflow_at_long_maturity():
    p = CirParams(5.0, 0.05, 0.4, 0.05)
    assert np.isfinite(zcb_price_cir(p, 0.05, 1000.0))
    log_f, g = cir_bond_coeffs(p, 1e4)
    assert np.isfinite(log_f) and np.isfinite(g)


def test_zero_volatility_limit_is_deterministic():
    # sigma = 0: P = exp(-[theta tau + (r - theta)(1 - e^{-kappa tau}) / kappa])
    k, th, r, tau = 0.1, 0.05, 0.03, 10.0
    log_f, g = bond_coeffs(k, th, 0.0, tau)
    ref = -(th * tau + (r - th) * (1 - math.exp(-k * tau)) / k)
    assert log_f - g * r == pytest.approx(ref, rel=1e-14)


def test_model1_legs():
    tau = 5.0
    rf = zcb_price_model1(RISK_FREE, SPREAD, 0.0346, 0.0004, tau, Leg.RISK_FREE)
    risky = zcb_price_model1(RISK_FREE, SPREAD, 0.0346, 0.0004, tau, "risky")
    assert rf == zcb_price_cir(RISK_FREE, 0.0346, tau)
    assert risky == rf * zcb_price_cir(SPREAD, 0.0004, tau)
    assert risky <= rf


def test_vanishing_spread_factor():
    tiny = CirParams(1.0, 1e-12, 1e-8, 1e-12)
    rf = zcb_price_model1(RISK_FREE, tiny, 0.0346, 0.0, 7.0)
    risky = zcb_price_model1(RISK_FREE, tiny, 0.0346, 0.0, 7.0, "risky")
    assert risky == pytest.approx(rf, rel=1e-10)


@given(pr=params, ps=params, s_now=st.floats(0.0, 0.2), tau=st.floats(0.0, 50.0))
def test_risky_never_above_risk_free(pr, ps, s_now, tau):
    rf = zcb_price_model1(pr, ps, pr.x0, s_now, tau)
    risky = zcb_price_model1(pr, ps, pr.x0, s_now, tau, Leg.RISKY)
    assert risky <= rf <= 1.0


def test_zero_rate_conversions():
    assert zero_rate(1.0, 3.0) == 0.0
    assert zero_rate(math.exp(-0.05 * 10), 10.0) == pytest.approx(0.05, rel=1e-15)
    with pytest.raises(ValueError):
        zero_rate(0.0, 1.0)
    with pytest.raises(ValueError):
        zero_rate(1.2, 1.0)
    with pytest.raises(ValueError):
        zero_rate(0.9, 0.0)


@given(price=st.floats(1e-6, 1.0), tau=st.floats(0.01, 50.0))
def test_rate_round_trip(price, tau):
    assert price_from_rate(zero_rate(price, tau), tau) == pytest.approx(price, rel=1e-15 * max(1.0, -math.log(price)) * 4)


@given(p=params, r=st.floats(1e-4, 0.2))
def test_price_decreasing_in_maturity_and_rate(p, r):
    tau = np.linspace(0.1, 30.0, 60)
    prices = zcb_price_cir(p, r, tau)
    assert np.all(np.diff(prices) < 0)
    assert zcb_price_cir(p, r * 1.1, 5.0) < zcb_price_cir(p, r, 5.0)


def _shape_ok(y):
    d = np.sign(np.diff(y))
    d = d[d != 0]
    changes = np.count_nonzero(np.diff(d))
    return changes == 0 or (changes == 1 and d[0] > 0)


@given(p=params)
def test_term_structure_shapes(p):
    tau = np.linspace(0.01, 30.0, 400)
    y = -np.log(zcb_price_cir(p, p.x0, tau)) / tau
    assert _shape_ok(y)


def test_model1_curves_are_log_prices():
    tenors = np.arange(1.0, 31.0)
    de, it = model1_curves(RISK_FREE, SPREAD, tenors)
    assert np.allclose(de, -np.log(zcb_price_cir(RISK_FREE, RISK_FREE.x0, tenors)) / tenors, rtol=1e-14)
    assert np.allclose(it - de, -np.log(zcb_price_cir(SPREAD, SPREAD.x0, tenors)) / tenors,
                       rtol=1e-10, atol=1e-17)
