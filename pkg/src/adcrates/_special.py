"""Special functions behind the CIR transition law.

``log_bessel_i`` evaluates the logarithm of the modified Bessel function of
the first kind for real order > -1 and positive argument, which is what the
square-root diffusion density needs. Two branches:

* a power series summed in log space around its dominant term, and
* the large-argument (Hankel) expansion, used above ``SERIES_CUTOFF`` when
  its terms shrink below double precision before they start to diverge.

Orders large relative to the argument make the Hankel series diverge too
early; those points stay on the power series, which has only positive terms
and therefore no cancellation at any argument.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gammainc, gammaln

SERIES_CUTOFF = 30.0
_HANKEL_TERMS = 80
_HANKEL_TOL = 1e-17
_CHUNK = 4096


def _log_bessel_series(order: float, y: np.ndarray) -> np.ndarray:
    out = np.empty_like(y)
    half = 0.5 * y
    # index of the largest series term
    peak = np.floor(0.5 * (-order + np.sqrt(order * order + y * y)))
    peak = np.maximum(peak, 0.0)
    width = np.ceil(30.0 + 10.0 * np.sqrt(peak + 1.0))
    for lo in range(0, y.size, _CHUNK):
        sl = slice(lo, lo + _CHUNK)
        w = int(width[sl].max()) if y[sl].size else 0
        k0 = np.maximum(peak[sl] - w, 0.0)
        k = k0[:, None] + np.arange(2 * w + 1)[None, :]
        logh = np.log(half[sl])[:, None]
        terms = (2.0 * k + order) * logh - gammaln(k + 1.0) - gammaln(k + order + 1.0)
        top = terms.max(axis=1)
        out[sl] = top + np.log(np.exp(terms - top[:, None]).sum(axis=1))
    return out


def _log_bessel_hankel(order: float, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (log I, converged mask) from the large-argument expansion."""
    mu = 4.0 * order * order
    j = np.arange(1, _HANKEL_TERMS + 1)
    # ratio between consecutive coefficients, divided by the argument below
    ratio = -(mu - (2.0 * j - 1.0) ** 2) / (8.0 * j)
    terms = np.cumprod(ratio[None, :] / y[:, None], axis=1)
    mags = np.abs(terms)
    # stop at the first term that is smaller than the tolerance, or before
    # the terms start growing again
    growing = np.diff(mags, axis=1, prepend=np.inf) > 0
    stop = growing | (mags < _HANKEL_TOL)
    first = np.where(stop.any(axis=1), stop.argmax(axis=1), _HANKEL_TERMS)
    keep = np.arange(_HANKEL_TERMS)[None, :] < first[:, None]
    total = 1.0 + np.where(keep, terms, 0.0).sum(axis=1)
    hit = np.minimum(first, _HANKEL_TERMS - 1)
    # only a stop on a negligible term counts; a stop on growth means the
    # truncation error is still above double precision
    converged = (first < _HANKEL_TERMS) & (mags[np.arange(y.size), hit] < _HANKEL_TOL)
    converged &= total > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        val = y - 0.5 * np.log(2.0 * np.pi * y) + np.log(total)
    return val, converged


def log_bessel_i(order: float, y, method: str = "auto") -> np.ndarray:
    """Natural log of I_order(y) for order > -1 and y > 0.

    ``method`` is ``"auto"``, ``"series"`` or ``"asymptotic"``; the last one
    raises if the expansion does not converge to double precision for some
    of the requested arguments.
    """
    if order <= -1.0:
        raise ValueError(f"order must be > -1, got {order}")
    y = np.asarray(y, dtype=float)
    shape = y.shape
    y = y.ravel()
    if np.any(y <= 0.0) or not np.all(np.isfinite(y)):
        raise ValueError("argument must be finite and strictly positive")
    if method == "series":
        return _log_bessel_series(order, y).reshape(shape)
    if method == "asymptotic":
        val, ok = _log_bessel_hankel(order, y)
        if not np.all(ok):
            raise ArithmeticError(
                f"asymptotic expansion does not converge for order {order} "
                f"at argument {y[~ok].min():g}"
            )
        return val.reshape(shape)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")

    out = np.empty_like(y)
    big = y > SERIES_CUTOFF
    small = ~big
    if np.any(big):
        val, ok = _log_bessel_hankel(order, y[big])
        idx = np.flatnonzero(big)
        out[idx[ok]] = val[ok]
        small[idx[~ok]] = True
    if np.any(small):
        out[small] = _log_bessel_series(order, y[small])
    return out.reshape(shape)


def poisson_window(mean: float, tail: float = 1e-12) -> tuple[int, int]:
    """Index range holding all but ``tail`` of a Poisson(mean) law's mass."""
    from scipy.stats import poisson

    if mean <= 0.0:
        return 0, 0
    lo = int(poisson.ppf(0.5 * tail, mean))
    hi = int(poisson.isf(0.5 * tail, mean)) + 1
    return max(lo, 0), hi


def noncentral_gamma_cdf(shape: float, noncentrality: float, z) -> np.ndarray:
    """CDF at ``z`` of the Poisson(noncentrality) mixture of Gamma(shape + K, 1).

    With ``z = c x``, ``shape = nu`` and ``noncentrality = u`` this is the
    noncentral chi-square CDF with 2*nu degrees of freedom and
    noncentrality 2*u evaluated at 2*c*x. The Poisson sum is truncated once
    less than 1e-12 of its mass remains outside.
    """
    z = np.asarray(z, dtype=float)
    shape_out = z.shape
    z = z.ravel()
    lo, hi = poisson_window(noncentrality)
    k = np.arange(lo, hi + 1, dtype=float)
    if noncentrality > 0.0:
        logw = k * np.log(noncentrality) - noncentrality - gammaln(k + 1.0)
    else:
        logw = np.where(k == 0, 0.0, -np.inf)
    weights = np.exp(logw)
    out = np.empty_like(z)
    for start in range(0, z.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        cdfs = gammainc(shape + k[None, :], np.maximum(z[sl], 0.0)[:, None])
        out[sl] = cdfs @ weights
    return np.clip(out, 0.0, 1.0).reshape(shape_out)
