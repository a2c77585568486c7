"""Closed-form zero-coupon prices for CIR factors and the independent two-factor model.

All curve rates are continuously compounded.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import NamedTuple

import numpy as np

from .cir import CirParams


class Leg(str, Enum):
    RISK_FREE = "risk_free"
    RISKY = "risky"


class BrownDybvig(NamedTuple):
    d: float
    phi: float


def brown_dybvig(p: CirParams | float, sigma: float | None = None) -> BrownDybvig:
    """d and phi from a parameter set, or from raw ``(kappa, sigma)`` (zeros allowed)."""
    if sigma is None:
        return _bd(p.kappa, p.sigma)
    return _bd(float(p), float(sigma))


def _bd(kappa: float, sigma: float) -> BrownDybvig:
    d = math.sqrt(kappa * kappa + 2.0 * sigma * sigma)
    return BrownDybvig(d, 0.5 * (d + kappa))


def _log1p_ratio(x):
    """log1p(x) / x for |x| < 1, equal to 1 at x = 0; complex-step safe."""
    x = np.asarray(x)
    small = np.abs(x) < 1e-2
    xs = np.where(small, x, 0.0)
    series = np.zeros_like(xs)
    for k in range(10, -1, -1):
        series = 1.0 / (k + 1) - xs * series
    xb = np.where(small, 1.0, x)
    return np.where(small, series, np.log(1.0 + xb) / xb)


def bond_coeffs(kappa: float, theta: float, sigma: float, tau):
    """(log f, g) for raw parameters; sigma = 0 gives the deterministic limit.

    With psi = d - phi = sigma^2 / (d + kappa) and m = expm1(-d tau),
    g = -m / (d + psi m) and
    log f = -2 kappa theta [tau + L(psi m / d) m / d] / (d + kappa), L(x) = log1p(x) / x,
    so no large terms cancel and nothing overflows.
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0.0):
        raise ValueError("tau must be >= 0")
    # plain arithmetic only, so a complex perturbation of the parameters propagates
    d = np.sqrt(kappa * kappa + 2.0 * sigma * sigma)
    if d == 0.0:
        raise ValueError("kappa and sigma cannot both be zero")
    psi = sigma * sigma / (d + kappa)
    m = np.expm1(-d * tau)
    g = -m / (d + psi * m)
    log_f = -2.0 * kappa * theta * (tau + _log1p_ratio(psi * m / d) * m / d) / (d + kappa)
    return log_f, g


def cir_bond_coeffs(p: CirParams, tau):
    """Return (log f, g) with price = f exp(-g r)."""
    return bond_coeffs(p.kappa, p.theta, p.sigma, tau)


def zcb_price_cir(p: CirParams, r_now: float, tau):
    """P = f exp(-g r_now) with the Brown-Dybvig form of f and g."""
    log_f, g = cir_bond_coeffs(p, tau)
    out = np.exp(log_f - g * r_now)
    return out if out.ndim else float(out)


def log_price_cir(p: CirParams, r_now: float, tau):
    log_f, g = cir_bond_coeffs(p, tau)
    return log_f - g * r_now


def zcb_price_model1(pr: CirParams, ps: CirParams, r_now: float, s_now: float, tau,
                     leg: Leg | str = Leg.RISK_FREE):
    """Price of the risk-free or risky zero-coupon bond under independent factors."""
    leg = Leg(leg)
    price = zcb_price_cir(pr, r_now, tau)
    if leg is Leg.RISKY:
        price = price * zcb_price_cir(ps, s_now, tau)
    return price


def zero_rate(price, tau):
    price = np.asarray(price, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if np.any(price <= 0.0) or np.any(price > 1.0):
        raise ValueError("price must lie in (0, 1]")
    if np.any(tau <= 0.0):
        raise ValueError("tau must be > 0")
    out = -np.log(price) / tau
    return out if out.ndim else float(out)


def price_from_rate(rate, tau):
    out = np.exp(-np.asarray(rate, dtype=float) * np.asarray(tau, dtype=float))
    return out if out.ndim else float(out)


def model1_curves(pr: CirParams, ps: CirParams, tenors, r_now: float | None = None,
                  s_now: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Model zero rates (risk-free, risky) on ``tenors``; starting levels default to x0."""
    r_now = pr.x0 if r_now is None else r_now
    s_now = ps.x0 if s_now is None else s_now
    tenors = np.asarray(tenors, dtype=float)
    log_pd = log_price_cir(pr, r_now, tenors)
    log_ps = log_price_cir(ps, s_now, tenors)
    return -log_pd / tenors, -(log_pd + log_ps) / tenors
