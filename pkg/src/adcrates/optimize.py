"""Derivative-free box-constrained minimizers used by the calibrator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float = 1e-12,
                   max_iter: int = 200) -> tuple[float, float, int]:
    """Minimize a unimodal ``f`` on [a, b]; returns (x, f(x), evaluations)."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    n = 2
    for _ in range(max_iter):
        if abs(b - a) <= tol * (abs(a) + abs(b) + 1e-300):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
        n += 1
    return (c, fc, n) if fc <= fd else (d, fd, n)


@dataclass
class SearchResult:
    x: np.ndarray
    fun: float
    n_evals: int
    converged: bool
    history: list[float] = field(default_factory=list)


def coordinate_search(f: Callable[[np.ndarray], float], x0: Sequence[float], lower: Sequence[float],
                      upper: Sequence[float], tol: float = 1e-10, max_evals: int = 20000,
                      bracket: float = 0.25) -> SearchResult:
    """Cycle golden-section line searches along each coordinate inside the box.

    Each line search covers ``bracket`` times the box width around the
    current point (clipped to the box); the bracket halves for a coordinate
    whenever its search fails to improve. Stops when a full cycle improves
    the objective by less than ``tol`` or the budget runs out.
    """
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    x = np.clip(np.asarray(x0, dtype=float), lo, hi)
    fx = f(x)
    n = 1
    history = [fx]
    width = bracket * (hi - lo)
    converged = False
    # a line search needs at least two evaluations
    while max_evals - n >= 2:
        start = fx
        for i in range(x.size):
            a = max(lo[i], x[i] - width[i])
            b = min(hi[i], x[i] + width[i])
            if b <= a:
                continue
            if max_evals - n < 2:
                break

            def line(t, i=i):
                y = x.copy()
                y[i] = t
                return f(y)

            # a line search costs 2 + max_iter evaluations
            t, ft, k = golden_section(line, a, b, tol=1e-10, max_iter=min(80, max_evals - n - 2))
            n += k
            if ft < fx:
                x[i] = t
                fx = ft
                # recentre: keep the bracket if the optimum sat at its edge
                if not (abs(t - a) < 1e-3 * (b - a) or abs(t - b) < 1e-3 * (b - a)):
                    width[i] *= 0.5
            else:
                width[i] *= 0.5
            history.append(fx)
            if n >= max_evals:
                break
        if start - fx < tol:
            converged = True
            break
    return SearchResult(x, fx, n, converged, history)


@dataclass(frozen=True)
class AnnealingSchedule:
    """Geometric cooling with proposal widths proportional to T / T0.

    ``t0=None`` uses the objective at the starting point. After
    ``reanneal_after`` stages without a new best, the temperature is reset to
    T0 / 10.
    """

    t0: float | None = None
    decay: float = 0.95
    steps_per_stage: int = 50
    reanneal_after: int = 5
    width: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.decay < 1.0:
            raise ValueError("decay must lie in (0, 1)")
        if self.steps_per_stage < 1:
            raise ValueError("steps_per_stage must be >= 1")


@dataclass
class AnnealingTrace:
    temperatures: list[float] = field(default_factory=list)
    accepted: int = 0
    rejected: int = 0
    reanneals: int = 0
    best: list[float] = field(default_factory=list)  # best-so-far after each evaluation


@dataclass
class AnnealingResult:
    x: np.ndarray
    fun: float
    n_evals: int
    converged: bool
    trace: AnnealingTrace
    start_fun: float


def _reflect(y: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    span = hi - lo
    z = np.mod(y - lo, 2.0 * span)
    z = np.where(z > span, 2.0 * span - z, z)
    return lo + z


def simulated_annealing(f: Callable[[np.ndarray], float], x0: Sequence[float], lower: Sequence[float],
                        upper: Sequence[float], schedule: AnnealingSchedule, rng: np.random.Generator,
                        max_evals: int = 20000, tol: float = 0.0,
                        scales: Sequence[float] | None = None) -> AnnealingResult:
    """Minimize ``f`` over a box; returns the best point ever evaluated.

    Uphill moves are accepted with probability exp(-delta / T). Proposals
    perturb every coordinate by a uniform step of half-width
    ``width * (T / T0) * scales`` (``scales`` defaults to the box widths) and
    are reflected into the box.
    """
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    span = hi - lo if scales is None else np.asarray(scales, dtype=float)
    x = np.clip(np.asarray(x0, dtype=float), lo, hi)
    fx = f(x)
    n = 1
    best_x, best_f = x.copy(), fx
    trace = AnnealingTrace(best=[best_f])
    t0 = schedule.t0 if schedule.t0 is not None else max(abs(fx), 1e-300)
    temp = t0
    stale = 0
    converged = best_f <= tol
    while n < max_evals and not converged:
        trace.temperatures.append(temp)
        improved = False
        scale = schedule.width * (temp / t0) * span
        for _ in range(schedule.steps_per_stage):
            y = _reflect(x + scale * rng.uniform(-1.0, 1.0, x.size), lo, hi)
            fy = f(y)
            n += 1
            delta = fy - fx
            if delta <= 0.0 or rng.random() < math.exp(-delta / temp):
                x, fx = y, fy
                trace.accepted += 1
            else:
                trace.rejected += 1
            if fy < best_f:
                best_x, best_f = y.copy(), fy
                improved = True
            trace.best.append(best_f)
            if best_f <= tol:
                converged = True
                break
            if n >= max_evals:
                break
        stale = 0 if improved else stale + 1
        if stale >= schedule.reanneal_after:
            temp = t0 / 10.0
            x, fx = best_x.copy(), best_f
            stale = 0
            trace.reanneals += 1
        else:
            temp *= schedule.decay
    return AnnealingResult(best_x, best_f, n, converged, trace, trace.best[0])
