"""Euler-Maruyama simulation of the one- and two-factor models.

Boundary policy is full truncation: drift and diffusion are evaluated at the
(nonnegative) current state and the updated state is clamped at zero.

Normal variates come from a Philox counter stream keyed by the seed and the
step index; within a step, path ``i`` always consumes draws ``2i`` and
``2i + 1``. Path ``i`` therefore sees the same noise whatever the total
number of paths, and every result is a pure function of (model, config).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

import numpy as np
from scipy import stats

from .adc import AdcParams, diffusion_components, drift_components, factor_components
from .cir import CirParams, transition_cdf
from .pricing import Leg

_KEY_SALT = 0x9E3779B97F4A7C15
_TIME_TOL = 1e-9


@dataclass(frozen=True)
class Model1:
    """Two independent CIR factors: risk-free rate ``r`` and spread ``s``."""

    r: CirParams
    s: CirParams

    def degenerate_adc(self) -> AdcParams:
        return AdcParams(self.r, self.s)


Model = Union[CirParams, Model1, AdcParams]


@dataclass(frozen=True)
class SimConfig:
    """Discretization and sampling settings.

    ``step_h`` is shrunk on construction so that ``horizon / step_h`` is an
    even integer (Simpson's rule needs pairs of intervals); it is never
    enlarged.
    """

    horizon: float
    step_h: float = 0.004
    n_paths: int = 5000
    seed: int = 0
    boundary_delta: float = 1e-6

    def __post_init__(self):
        if not self.horizon > 0.0:
            raise ValueError(f"horizon must be > 0, got {self.horizon!r}")
        if not self.step_h > 0.0:
            raise ValueError(f"step_h must be > 0, got {self.step_h!r}")
        if int(self.n_paths) != self.n_paths or self.n_paths <= 0:
            raise ValueError(f"n_paths must be a positive integer, got {self.n_paths!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.boundary_delta < 0.0:
            raise ValueError("boundary_delta must be >= 0")
        ratio = self.horizon / self.step_h
        n = round(ratio)
        if abs(ratio - n) > _TIME_TOL * max(1.0, ratio):
            n = math.ceil(ratio)
        if n % 2:
            n += 1
        object.__setattr__(self, "n_paths", int(self.n_paths))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "step_h", self.horizon / n)

    @property
    def n_steps(self) -> int:
        return round(self.horizon / self.step_h)

    def step_index(self, t: float) -> int:
        """Grid index of time ``t``; raises if ``t`` is not on the grid."""
        k = t / self.step_h
        n = round(k)
        if abs(k - n) > _TIME_TOL * max(1.0, k) or n < 0 or n > self.n_steps:
            raise ValueError(f"t = {t!r} is not on the simulation grid (h = {self.step_h!r})")
        return n


@dataclass(frozen=True)
class McPrice:
    value: float
    std_error: float
    n_paths: int


@dataclass(frozen=True)
class HitEstimate:
    probability: float
    std_error: float
    n_paths: int
    n_hits: int
    axis_probabilities: tuple[float, float]

    def significantly_positive(self, n_se: float = 3.0) -> bool:
        return self.n_hits > 0 and self.probability > n_se * self.std_error


@dataclass
class PathBatch:
    times: np.ndarray
    states: np.ndarray  # (n_paths, n_times, 2)
    hit_flags: np.ndarray
    axis_hits: np.ndarray  # (n_paths, 2)
    seed: int
    step_h: float
    univariate: bool = False

    def time_index(self, t: float) -> int:
        idx = np.flatnonzero(np.abs(self.times - t) <= _TIME_TOL * max(1.0, abs(t)))
        if idx.size == 0:
            raise ValueError(f"t = {t!r} is not a recorded time of this batch")
        return int(idx[0])

    def samples(self, t: float, component: str = "r") -> np.ndarray:
        k = self.time_index(t)
        if component == "r":
            return self.states[:, k, 0]
        if component == "s":
            return self.states[:, k, 1]
        if component == "joint":
            return self.states[:, k, :]
        raise ValueError(f"component must be r, s or joint, got {component!r}")

    def to_csv(self, path, header_lines: Sequence[str] = ()) -> None:
        with open(path, "w", newline="") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["path", "step", "t", "r", "s"])
            steps = np.rint(self.times / self.step_h).astype(int)
            for i in range(self.states.shape[0]):
                for k, t in enumerate(self.times):
                    w.writerow([i, steps[k], repr(float(t)), repr(float(self.states[i, k, 0])),
                                repr(float(self.states[i, k, 1]))])


def _key(seed: int) -> np.ndarray:
    return np.array([seed, _KEY_SALT], dtype=np.uint64)


def step_normals(seed: int, step: int, n_paths: int) -> np.ndarray:
    """Standard normals of shape (n_paths, 2) for one time step."""
    bitgen = np.random.Philox(key=_key(seed), counter=np.array([0, step, 0, 0], dtype=np.uint64))
    return np.random.Generator(bitgen).standard_normal((n_paths, 2))


def draw_normals(cfg: SimConfig, n_steps: int | None = None) -> np.ndarray:
    """All normals of a run, shape (n_steps, n_paths, 2); reusable as common random numbers."""
    n_steps = cfg.n_steps if n_steps is None else n_steps
    out = np.empty((n_steps, cfg.n_paths, 2))
    for k in range(n_steps):
        out[k] = step_normals(cfg.seed, k, cfg.n_paths)
    return out


def _initial(model: Model) -> tuple[float, float]:
    if isinstance(model, CirParams):
        return model.x0, 0.0
    return model.r.x0, model.s.x0


def _coefficients(model: Model):
    """Return a function (r, s) -> (A1, A2, S11, S12, S22)."""
    if isinstance(model, AdcParams):
        def coef(r, s):
            a1, a2 = drift_components(model, r, s)
            s11, s12, s22 = diffusion_components(model, r, s)
            return a1, a2, s11, s12, s22
    elif isinstance(model, Model1):
        kr, tr, vr = model.r.kappa, model.r.theta, model.r.sigma**2
        ks, ts, vs = model.s.kappa, model.s.theta, model.s.sigma**2

        def coef(r, s):
            zero = 0.0 * r
            return kr * (tr - r), ks * (ts - s), vr * r, zero, vs * s
    elif isinstance(model, CirParams):
        k, th, v = model.kappa, model.theta, model.sigma**2

        def coef(r, s):
            zero = 0.0 * r
            return k * (th - r), zero, v * r, zero, zero
    else:
        raise TypeError(f"unsupported model type {type(model).__name__}")
    return coef


def euler_stream(model: Model, cfg: SimConfig, n_steps: int | None = None,
                 normals: np.ndarray | None = None, initial=None
                 ) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
    """Yield ``(step, r, s)`` for step = 0..n_steps under full truncation.

    ``initial`` optionally gives per-path starting states ``(r, s)``; the
    default starts every path at the model's x0. The yielded arrays are
    replaced, not mutated, between steps.
    """
    n_steps = cfg.n_steps if n_steps is None else n_steps
    if n_steps > cfg.n_steps:
        raise ValueError("cannot step past the configured horizon")
    coef = _coefficients(model)
    r0, s0 = _initial(model)
    n = cfg.n_paths
    h = cfg.step_h
    sqrt_h = math.sqrt(h)
    if initial is None:
        r = np.full(n, float(r0))
        s = np.full(n, float(s0))
    else:
        r = np.broadcast_to(np.asarray(initial[0], dtype=float), (n,)).copy()
        s = np.broadcast_to(np.asarray(initial[1], dtype=float), (n,)).copy()
        if np.any(r < 0.0) or np.any(s < 0.0):
            raise ValueError("initial states must be >= 0")
    yield 0, r, s
    for k in range(n_steps):
        z = normals[k] if normals is not None else step_normals(cfg.seed, k, n)
        a1, a2, s11, s12, s22 = coef(r, s)
        l11, l21, l22 = factor_components(s11, s12, s22)
        dw1 = sqrt_h * z[:, 0]
        dw2 = sqrt_h * z[:, 1]
        r = np.maximum(r + a1 * h + l11 * dw1, 0.0)
        s = np.maximum(s + a2 * h + (l21 * dw1 + l22 * dw2), 0.0)
        yield k + 1, r, s


def simulate(model: Model, cfg: SimConfig, record_every: int = 1, initial=None) -> PathBatch:
    """Simulate ``cfg.n_paths`` paths to ``cfg.horizon``.

    States are stored every ``record_every`` steps (plus the first and last
    step); boundary hits are tracked at every step. ``initial`` is passed to
    :func:`euler_stream`.
    """
    record_every = max(int(record_every), 1)
    univariate = isinstance(model, CirParams)
    delta = cfg.boundary_delta
    rec_steps = sorted(set(range(0, cfg.n_steps + 1, record_every)) | {cfg.n_steps})
    rec_pos = {k: i for i, k in enumerate(rec_steps)}
    states = np.empty((cfg.n_paths, len(rec_steps), 2))
    hit = np.zeros(cfg.n_paths, dtype=bool)
    axis = np.zeros((cfg.n_paths, 2), dtype=bool)
    for k, r, s in euler_stream(model, cfg, initial=initial):
        below_r = r < delta
        below_s = s < delta
        if univariate:
            hit |= below_r
            axis[:, 0] |= below_r
        else:
            hit |= below_r & below_s
            axis[:, 0] |= below_r
            axis[:, 1] |= below_s
        i = rec_pos.get(k)
        if i is not None:
            states[:, i, 0] = r
            states[:, i, 1] = s
    times = np.array(rec_steps, dtype=float) * cfg.step_h
    return PathBatch(times, states, hit, axis, cfg.seed, cfg.step_h, univariate)


def simpson_weights(n_intervals: int) -> np.ndarray:
    """Composite Simpson weights (without the h/3 factor) for an even interval count."""
    if n_intervals % 2 or n_intervals < 0:
        raise ValueError(f"Simpson's rule needs an even interval count, got {n_intervals}")
    w = np.ones(n_intervals + 1)
    if n_intervals:
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
    return w


def simpson(values: np.ndarray, h: float) -> float:
    values = np.asarray(values, dtype=float)
    return h / 3.0 * float(np.dot(simpson_weights(values.size - 1), values))


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    n = values.size
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((values - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var / n)


def _grid_indices(cfg: SimConfig, maturities: Sequence[float]) -> list[int]:
    idx = []
    for T in maturities:
        if T < 0 or T > cfg.horizon * (1 + _TIME_TOL):
            raise ValueError(f"maturity {T!r} outside [0, horizon]")
        k = cfg.step_index(T)
        if k % 2:
            raise ValueError(f"maturity {T!r} spans an odd number of steps ({k})")
        idx.append(k)
    return idx


def discount_integrals(model: Model, cfg: SimConfig, maturities: Sequence[float],
                       normals: np.ndarray | None = None) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-path Simpson integrals of ``r`` and of ``s`` from 0 to each maturity."""
    idx = _grid_indices(cfg, maturities)
    last = max(idx, default=0)
    wanted = set(idx)
    h = cfg.step_h
    acc_r = acc_s = None
    found: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for k, r, s in euler_stream(model, cfg, n_steps=last, normals=normals):
        if k == 0:
            acc_r, acc_s = r.copy(), s.copy()
        else:
            w = 4.0 if k % 2 else 2.0
            acc_r += w * r
            acc_s += w * s
        if k in wanted:
            if k == 0:
                found[k] = (np.zeros_like(r), np.zeros_like(s))
            else:
                found[k] = (h / 3.0 * (acc_r - r), h / 3.0 * (acc_s - s))
    return [found[k] for k in idx]


def _prices(integrals, leg: Leg, n_paths: int) -> list[McPrice]:
    out = []
    for i_r, i_s in integrals:
        value, se = _mean_se(np.exp(-(i_r + i_s if leg is Leg.RISKY else i_r)))
        out.append(McPrice(value, se, n_paths))
    return out


def price_curve_mc(model: Model, cfg: SimConfig, maturities: Sequence[float],
                   leg: Leg | str = Leg.RISK_FREE, normals: np.ndarray | None = None) -> list[McPrice]:
    """Monte Carlo zero-coupon prices for several maturities from one set of paths.

    Each path's discount exponent is the Simpson integral of ``r`` (risk-free
    leg) or ``r + s`` (risky leg) on the simulation grid; every maturity must
    sit an even number of steps from zero.
    """
    leg = Leg(leg)
    if isinstance(model, CirParams) and leg is Leg.RISKY:
        raise ValueError("a single factor has no risky leg")
    return _prices(discount_integrals(model, cfg, maturities, normals), leg, cfg.n_paths)


def price_both_legs_mc(model: Model, cfg: SimConfig, maturities: Sequence[float],
                       normals: np.ndarray | None = None) -> tuple[list[McPrice], list[McPrice]]:
    """Risk-free and risky prices from the same paths."""
    ints = discount_integrals(model, cfg, maturities, normals)
    return _prices(ints, Leg.RISK_FREE, cfg.n_paths), _prices(ints, Leg.RISKY, cfg.n_paths)


def price_zcb_mc(model: Model, cfg: SimConfig, T: float, leg: Leg | str = Leg.RISK_FREE) -> McPrice:
    return price_curve_mc(model, cfg, [T], leg)[0]


def resolving_step(model: Model, delta: float, h_max: float = 0.004) -> float:
    """Largest step (capped at ``h_max``) whose clamp scale sigma^2 h stays below ``delta``.

    Near zero a full-truncation step moves the state by about sigma^2 h, so
    coarser steps land below a threshold ``delta`` through discretization
    alone even when the diffusion cannot reach the origin.
    """
    if isinstance(model, CirParams):
        sig2 = model.sigma**2
    else:
        sig2 = max(model.r.sigma, model.s.sigma) ** 2
    if delta <= 0.0:
        return h_max
    return min(h_max, delta / sig2)


def hitting_probability(model: Model, cfg: SimConfig) -> HitEstimate:
    """Fraction of paths that ever come within ``boundary_delta`` of the origin.

    Bivariate models count a hit when both components are below the
    threshold at the same step; a single factor counts its own level.
    """
    univariate = isinstance(model, CirParams)
    delta = cfg.boundary_delta
    hit = np.zeros(cfg.n_paths, dtype=bool)
    axis_r = np.zeros(cfg.n_paths, dtype=bool)
    axis_s = np.zeros(cfg.n_paths, dtype=bool)
    for _, r, s in euler_stream(model, cfg):
        br = r < delta
        axis_r |= br
        if univariate:
            hit |= br
        else:
            bs = s < delta
            axis_s |= bs
            hit |= br & bs
    n = cfg.n_paths
    n_hits = int(hit.sum())
    p = n_hits / n
    return HitEstimate(p, math.sqrt(p * (1.0 - p) / n), n, n_hits,
                       (float(axis_r.mean()), float(axis_s.mean())))


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    masses: np.ndarray

    def to_csv(self, path, header_lines: Sequence[str] = ()) -> None:
        with open(path, "w", newline="") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["bin_lo", "bin_hi", "mass"])
            for lo, hi, m in zip(self.edges[:-1], self.edges[1:], self.masses):
                w.writerow([repr(float(lo)), repr(float(hi)), repr(float(m))])


@dataclass(frozen=True)
class Histogram2D:
    r_edges: np.ndarray
    s_edges: np.ndarray
    masses: np.ndarray  # (len(r_edges) - 1, len(s_edges) - 1)

    def density(self) -> np.ndarray:
        area = np.outer(np.diff(self.r_edges), np.diff(self.s_edges))
        return self.masses / area

    def to_csv(self, path, header_lines: Sequence[str] = (), values: np.ndarray | None = None,
               column: str = "mass") -> None:
        values = self.masses if values is None else values
        with open(path, "w", newline="") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["r_lo", "r_hi", "s_lo", "s_hi", column])
            for i in range(values.shape[0]):
                for j in range(values.shape[1]):
                    w.writerow([repr(float(self.r_edges[i])), repr(float(self.r_edges[i + 1])),
                                repr(float(self.s_edges[j])), repr(float(self.s_edges[j + 1])),
                                repr(float(values[i, j]))])


MAX_BINS = 200


def fd_edges(x: np.ndarray, max_bins: int = MAX_BINS) -> np.ndarray:
    """Freedman-Diaconis bin edges, capped at ``max_bins`` bins."""
    edges = np.histogram_bin_edges(x, bins="fd")
    if edges.size - 1 > max_bins:
        edges = np.histogram_bin_edges(x, bins=max_bins)
    return edges


def empirical_distribution(batch: PathBatch, t: float, component: str = "r"):
    """Normalized histogram of one component (or the joint state) at time ``t``."""
    x = batch.samples(t, component)
    n = x.shape[0]
    if component == "joint":
        r_edges = fd_edges(x[:, 0])
        s_edges = fd_edges(x[:, 1])
        counts, _, _ = np.histogram2d(x[:, 0], x[:, 1], bins=[r_edges, s_edges])
        return Histogram2D(r_edges, s_edges, counts / n)
    edges = fd_edges(x)
    counts, _ = np.histogram(x, bins=edges)
    return Histogram(edges, counts / n)


@dataclass(frozen=True)
class KsResult:
    statistic: float
    critical: float
    pvalue: float
    n: int

    @property
    def passed(self) -> bool:
        return self.statistic < self.critical


def ks_test(samples: np.ndarray, cdf, level: float = 0.01) -> KsResult:
    """One-sample KS test; ``critical`` is the exact (1 - level) quantile of the statistic."""
    samples = np.asarray(samples, dtype=float)
    res = stats.kstest(samples, cdf)
    n = samples.size
    return KsResult(float(res.statistic), float(stats.kstwo.ppf(1.0 - level, n)), float(res.pvalue), n)


@dataclass(frozen=True)
class ComparisonReport:
    kappa: float
    nu_total: float
    z0: float
    t: float
    ks: KsResult
    near_zero_threshold: float
    near_zero_empirical: float
    near_zero_law: float
    reference: CirParams = field(repr=False)


def _factor_seed(seed: int, i: int) -> int:
    return int(np.random.SeedSequence([seed, i]).generate_state(1, np.uint64)[0])


def comparison_sum_check(factors: Sequence[CirParams], cfg: SimConfig, t: float | None = None,
                         near_zero: float | None = None) -> ComparisonReport:
    """Compare Z_t = sum_i X_i(t) / sigma_i^2 with its one-dimensional CIR law.

    With a common kappa, Z solves the CIR equation with (kappa, sum(nu) / (2 kappa),
    sigma = 1) started at sum_i x0_i / sigma_i^2. Factors are simulated
    independently with the Euler scheme.
    """
    if not factors:
        raise ValueError("need at least one factor")
    kappa = factors[0].kappa
    if any(not math.isclose(f.kappa, kappa, rel_tol=1e-12) for f in factors):
        raise ValueError("all factors must share the same kappa")
    t = cfg.horizon if t is None else t
    k = cfg.step_index(t)
    z = np.zeros(cfg.n_paths)
    for i, f in enumerate(factors):
        sub = SimConfig(cfg.horizon, cfg.step_h, cfg.n_paths, _factor_seed(cfg.seed, i), cfg.boundary_delta)
        for step, r, _ in euler_stream(f, sub, n_steps=k):
            pass
        z += r / f.sigma**2
    nu = sum(f.nu for f in factors)
    z0 = sum(f.x0 / f.sigma**2 for f in factors)
    ref = CirParams(kappa, nu / (2.0 * kappa), 1.0, z0)
    ks = ks_test(z, lambda x: transition_cdf(ref, t, x))
    thr = 0.01 * ref.theta if near_zero is None else near_zero
    return ComparisonReport(kappa, nu, z0, t, ks, thr, float(np.mean(z <= thr)),
                            float(transition_cdf(ref, t, thr)), ref)
