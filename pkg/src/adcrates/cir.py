"""Univariate square-root (CIR) diffusion.

    dX = kappa (theta - X) dt + sigma sqrt(X) dW,    X_0 = x0

The transition law over a time ``t`` is a scaled noncentral chi-square;
the long-time law is Gamma with shape ``nu = 2 kappa theta / sigma^2`` and
rate ``omega = nu / theta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammainc, gammaln

from ._special import log_bessel_i, noncentral_gamma_cdf


class ParameterError(ValueError):
    """Invalid model parameters; ``code`` identifies which rule failed."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class CirParams:
    """Parameters of one square-root factor.

    Attributes
    ----------
    kappa : float
        Mean-reversion speed, 1/years.
    theta : float
        Long-run level.
    sigma : float
        Volatility scale.
    x0 : float
        Initial level.
    """

    kappa: float
    theta: float
    sigma: float
    x0: float

    def __post_init__(self):
        for name in ("kappa", "theta", "sigma", "x0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ParameterError(
                    "nonpositive_cir", f"{name} must be finite and > 0, got {value!r}"
                )
        nu = self.nu
        if not (math.isfinite(nu) and nu > 0.0 and math.isfinite(nu / self.theta)):
            raise ParameterError("nonpositive_cir", f"derived shape is not finite: {nu!r}")

    @property
    def nu(self) -> float:
        return 2.0 * self.kappa * self.theta / (self.sigma * self.sigma)

    @property
    def omega(self) -> float:
        """Rate of the stationary Gamma law (nu / theta)."""
        return self.nu / self.theta

    @property
    def stationary_scale(self) -> float:
        """Scale of the stationary Gamma law, theta / nu = 1 / omega."""
        return self.theta / self.nu


class TransitionCoeffs(NamedTuple):
    c: float
    u: float
    nu: float


def derived_shape(p: CirParams) -> tuple[float, float]:
    """Return ``(nu, omega)`` of the stationary Gamma law."""
    return p.nu, p.omega


def transition_coeffs(p: CirParams, t: float, x_from: float | None = None) -> TransitionCoeffs:
    """Coefficients c, u, nu of the transition law over time ``t``.

    ``x_from`` defaults to ``p.x0``.
    """
    if not t > 0.0:
        raise ValueError(f"t must be > 0, got {t!r}")
    x_from = p.x0 if x_from is None else x_from
    if x_from < 0.0:
        raise ValueError(f"starting level must be >= 0, got {x_from!r}")
    kt = p.kappa * t
    s2 = p.sigma * p.sigma
    if kt < 1e-12:
        c = 1.0 / (s2 * t * (1.0 - 0.5 * kt))
    else:
        c = 2.0 * p.kappa / (s2 * -math.expm1(-kt))
    u = c * x_from * math.exp(-kt)
    return TransitionCoeffs(c, u, p.nu)


def _check_x(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(np.isnan(x)):
        raise ValueError("x must be >= 0")
    return x


def log_transition_density(p: CirParams, t: float, x, x_from: float | None = None,
                           bessel_method: str = "auto") -> np.ndarray:
    c, u, nu = transition_coeffs(p, t, x_from)
    x = _check_x(x)
    v = c * x
    out = np.full(x.shape, -np.inf)
    pos = v > 0.0
    if u == 0.0:
        # Gamma(nu, c) density: the limit of the Bessel form as u -> 0
        out[pos] = math.log(c) + (nu - 1.0) * np.log(v[pos]) - v[pos] - gammaln(nu)
        if nu < 1.0:
            out[~pos] = np.inf
        elif nu == 1.0:
            out[~pos] = math.log(c)
        return out
    vp = v[pos]
    order = nu - 1.0
    arg = 2.0 * np.sqrt(u * vp)
    out[pos] = (
        math.log(c) - (u + vp) + 0.5 * order * (np.log(vp) - math.log(u))
        + log_bessel_i(order, arg, method=bessel_method)
    )
    if np.any(~pos):
        if nu > 1.0:
            out[~pos] = -np.inf
        elif nu == 1.0:
            out[~pos] = math.log(c) - u
        else:
            out[~pos] = np.inf
    return out


def transition_density(p: CirParams, t: float, x, x_from: float | None = None) -> np.ndarray:
    """Density of X_t at ``x`` given X_0 = ``x_from`` (default ``p.x0``).

    For nu < 1 the density diverges at x = 0 (integrable); callers that need
    the mass near zero should use :func:`transition_cdf`.
    """
    out = np.exp(log_transition_density(p, t, x, x_from))
    return out if out.ndim else float(out)


def transition_cdf(p: CirParams, t: float, x, x_from: float | None = None) -> np.ndarray:
    """P[X_t <= x | X_0 = x_from]: the noncentral chi-square CDF at 2 c x."""
    c, u, nu = transition_coeffs(p, t, x_from)
    x = _check_x(x)
    out = np.where(np.isinf(x), 1.0, noncentral_gamma_cdf(nu, u, np.where(np.isinf(x), 0.0, c * x)))
    return out if out.ndim else float(out)


def conditional_moments(p: CirParams, t: float, x_from: float | None = None) -> tuple[float, float]:
    """Mean and variance of X_t given X_0 = ``x_from``."""
    c, u, nu = transition_coeffs(p, t, x_from)
    return (nu + u) / c, (nu + 2.0 * u) / (c * c)


def stationary_moments(p: CirParams) -> tuple[float, float]:
    """Mean and variance of the stationary Gamma law: theta and theta sigma^2 / (2 kappa)."""
    return p.theta, p.theta * p.sigma**2 / (2.0 * p.kappa)


def stationary_density(p: CirParams, x) -> np.ndarray:
    x = _check_x(x)
    nu, omega = p.nu, p.omega
    with np.errstate(divide="ignore"):
        logd = nu * math.log(omega) - gammaln(nu) + (nu - 1.0) * np.log(x) - omega * x
    out = np.exp(logd)
    return out if out.ndim else float(out)


def stationary_cdf(p: CirParams, x) -> np.ndarray:
    x = _check_x(x)
    out = gammainc(p.nu, p.omega * x)
    return out if out.ndim else float(out)


def sample_exact(p: CirParams, x_from, dt: float, rng: np.random.Generator, size=None):
    """Draw X_{dt} given X_0 = ``x_from`` from the exact transition law.

    The law is a Poisson(u) mixture of Gamma(nu + K, 1) variables scaled by
    1 / c. ``x_from`` may be an array; ``size`` defaults to its shape.
    """
    if not dt > 0.0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    x_from = np.asarray(x_from, dtype=float)
    if np.any(x_from < 0.0):
        raise ValueError("x_from must be >= 0")
    c, _, nu = transition_coeffs(p, dt, 0.0)
    u = c * x_from * math.exp(-p.kappa * dt)
    k = rng.poisson(u, size=size)
    out = rng.standard_gamma(nu + k, size=size) / c
    return out if np.ndim(out) else float(out)


def feller_hits_origin(p: CirParams) -> bool:
    """True when the origin is reachable, i.e. nu < 1."""
    return p.nu < 1.0
