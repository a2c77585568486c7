"""Zero-rate curves from quotes: natural cubic splines, swap bootstrap, spreads."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

KINDS = ("zero_rate", "discount_price", "swap_rate")
STANDARD_TENORS = np.arange(1.0, 31.0)


class QuoteError(ValueError):
    pass


@dataclass(frozen=True)
class Quote:
    maturity: float
    kind: str
    value: float


@dataclass(frozen=True)
class QuoteSet:
    quotes: tuple[Quote, ...]

    def __post_init__(self):
        by_kind: dict[str, list[float]] = {}
        for q in self.quotes:
            if q.kind not in KINDS:
                raise QuoteError(f"unknown quote kind {q.kind!r}")
            if not q.maturity > 0.0:
                raise QuoteError(f"maturity must be > 0, got {q.maturity!r}")
            if q.kind == "discount_price":
                if not 0.0 < q.value <= 1.0:
                    raise QuoteError(f"discount price {q.value!r} outside (0, 1]")
            elif not -0.5 < q.value < 1.0:
                raise QuoteError(f"rate {q.value!r} outside (-0.5, 1)")
            mats = by_kind.setdefault(q.kind, [])
            if mats and q.maturity == mats[-1]:
                raise QuoteError(f"duplicate maturity {q.maturity!r} for {q.kind}")
            if mats and q.maturity < mats[-1]:
                raise QuoteError(f"maturities for {q.kind} are not increasing at {q.maturity!r}")
            mats.append(q.maturity)

    @classmethod
    def from_rates(cls, maturities: Iterable[float], rates: Iterable[float], kind: str = "zero_rate"):
        return cls(tuple(Quote(float(m), kind, float(v)) for m, v in zip(maturities, rates)))

    def of_kind(self, kind: str) -> list[Quote]:
        return [q for q in self.quotes if q.kind == kind]


def read_quotes_csv(path) -> QuoteSet:
    """Read ``maturity_years,kind,value`` rows; lines starting with '#' are skipped."""
    with open(path, newline="") as fh:
        rows = [line for line in fh if line.strip() and not line.lstrip().startswith("#")]
    reader = csv.DictReader(rows)
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["maturity_years", "kind", "value"]:
        raise QuoteError(f"expected header maturity_years,kind,value in {path}")
    quotes = []
    for row in reader:
        quotes.append(Quote(float(row["maturity_years"]), row["kind"].strip(), float(row["value"])))
    return QuoteSet(tuple(quotes))


def write_quotes_csv(path, q: QuoteSet, header_lines: Sequence[str] = ()) -> None:
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["maturity_years", "kind", "value"])
        for x in q.quotes:
            w.writerow([repr(x.maturity), x.kind, repr(x.value)])


@dataclass(frozen=True)
class YieldCurve:
    """Continuously compounded zero rates on ``tenors``, backed by a natural cubic spline.

    ``knots``/``knot_rates`` are the spline nodes; evaluation outside the knot
    range raises.
    """

    tenors: np.ndarray
    zero_rates: np.ndarray
    knots: np.ndarray
    knot_rates: np.ndarray
    spline: CubicSpline = field(repr=False, compare=False)

    def rate(self, tau):
        tau = np.asarray(tau, dtype=float)
        lo, hi = self.knots[0], self.knots[-1]
        if np.any(tau < lo * (1 - 1e-12)) or np.any(tau > hi * (1 + 1e-12)):
            raise ValueError(f"tenor outside the knot range [{lo}, {hi}]; extrapolation is not allowed")
        out = self.spline(np.clip(tau, lo, hi))
        return out if out.ndim else float(out)

    def discount(self, tau):
        return np.exp(-np.asarray(self.rate(tau)) * np.asarray(tau, dtype=float))

    def shifted(self, bump) -> "YieldCurve":
        """Same tenors with ``bump`` (scalar or per-tenor) added to the rates."""
        return curve_from_rates(self.tenors, self.zero_rates + bump)

    def to_csv(self, path, header_lines: Sequence[str] = ()) -> None:
        _write_columns(path, ("tenor_years", "zero_rate"), self.tenors, self.zero_rates, header_lines)


def _write_columns(path, names, a, b, header_lines):
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for x, y in zip(a, b):
            w.writerow([repr(float(x)), repr(float(y))])


def read_curve_csv(path) -> "YieldCurve":
    with open(path, newline="") as fh:
        rows = [line for line in fh if line.strip() and not line.lstrip().startswith("#")]
    reader = csv.DictReader(rows)
    t, r = [], []
    for row in reader:
        t.append(float(row["tenor_years"]))
        r.append(float(row["zero_rate"]))
    return curve_from_rates(t, r)


def _natural_spline(knots: np.ndarray, rates: np.ndarray) -> CubicSpline:
    if knots.size < 2:
        raise QuoteError("need at least two quotes to build a curve")
    if knots.size == 2:
        # a two-point natural spline is the chord
        return CubicSpline(knots, rates, bc_type=((2, 0.0), (2, 0.0)))
    return CubicSpline(knots, rates, bc_type="natural")


def curve_from_rates(tenors, rates, eval_tenors=None) -> YieldCurve:
    knots = np.asarray(tenors, dtype=float)
    knot_rates = np.asarray(rates, dtype=float)
    if knots.shape != knot_rates.shape:
        raise QuoteError("tenors and rates differ in length")
    if np.any(np.diff(knots) <= 0.0):
        raise QuoteError("tenors must be strictly increasing")
    spline = _natural_spline(knots, knot_rates)
    ev = knots if eval_tenors is None else np.asarray(eval_tenors, dtype=float)
    curve = YieldCurve(ev, knot_rates, knots, knot_rates, spline)
    if eval_tenors is not None:
        curve = YieldCurve(ev, np.asarray(curve.rate(ev), dtype=float), knots, knot_rates, spline)
    return curve


def _as_zero_rates(q: QuoteSet) -> tuple[np.ndarray, np.ndarray]:
    kinds = {x.kind for x in q.quotes}
    if "swap_rate" in kinds:
        raise QuoteError("swap quotes go through bootstrap_swaps, not build_curve")
    pts: dict[float, float] = {}
    for x in q.quotes:
        rate = x.value if x.kind == "zero_rate" else -math.log(x.value) / x.maturity
        if x.maturity in pts:
            raise QuoteError(f"duplicate maturity {x.maturity!r} across quote kinds")
        pts[x.maturity] = rate
    mats = np.array(sorted(pts))
    return mats, np.array([pts[m] for m in mats])


def build_curve(q: QuoteSet, tenors: Sequence[float] = STANDARD_TENORS) -> YieldCurve:
    """Convert quotes to zero rates, fit a natural cubic spline and evaluate it on ``tenors``."""
    mats, rates = _as_zero_rates(q)
    return curve_from_rates(mats, rates, eval_tenors=tenors)


def bootstrap_discounts(swap_rates: Sequence[float]) -> np.ndarray:
    """Discount factors P_1..P_n from annual par swap rates S_1..S_n (30/360, annual fixed leg)."""
    rates = np.asarray(swap_rates, dtype=float)
    out = np.empty(rates.size)
    annuity = 0.0
    for n, s in enumerate(rates):
        p = (1.0 - s * annuity) / (1.0 + s)
        if not p > 0.0:
            raise QuoteError(f"bootstrapped discount factor {p!r} at {n + 1}y is not positive")
        out[n] = p
        annuity += p
    return out


def par_rates(discounts: Sequence[float]) -> np.ndarray:
    """Par swap rates implied by annual discount factors."""
    d = np.asarray(discounts, dtype=float)
    return (1.0 - d) / np.cumsum(d)


def bootstrap_swaps(swap_rates: Sequence[float] | QuoteSet) -> YieldCurve:
    """Zero curve on 1..n years from consecutive annual par swap rates."""
    if isinstance(swap_rates, QuoteSet):
        qs = swap_rates.of_kind("swap_rate")
        mats = [x.maturity for x in qs]
        if mats != [float(k) for k in range(1, len(mats) + 1)]:
            raise QuoteError("swap quotes must cover consecutive annual tenors starting at 1y")
        swap_rates = [x.value for x in qs]
    d = bootstrap_discounts(swap_rates)
    tenors = np.arange(1.0, d.size + 1.0)
    return curve_from_rates(tenors, -np.log(d) / tenors)


@dataclass(frozen=True)
class SpreadCurve:
    tenors: np.ndarray
    spreads: np.ndarray

    def to_csv(self, path, header_lines: Sequence[str] = ()) -> None:
        _write_columns(path, ("tenor_years", "spread"), self.tenors, self.spreads, header_lines)


def spread_curve(it: YieldCurve, de: YieldCurve) -> SpreadCurve:
    """Pointwise ``it - de`` on a shared tenor grid."""
    if it.tenors.shape != de.tenors.shape or not np.array_equal(it.tenors, de.tenors):
        raise ValueError("curves are on different tenor grids")
    return SpreadCurve(it.tenors.copy(), it.zero_rates - de.zero_rates)


def synthetic_quotes(pr, ps, tenors=STANDARD_TENORS, noise_bp: float = 0.0, seed: int = 7):
    """German (risk-free) and Italian (risky) zero-rate quotes from the independent two-factor model.

    ``noise_bp`` adds seed-fixed uniform noise in [-noise_bp, noise_bp] basis
    points to each quote.
    """
    from .pricing import model1_curves

    tenors = np.asarray(tenors, dtype=float)
    de, it = model1_curves(pr, ps, tenors)
    if noise_bp:
        rng = np.random.default_rng(seed)
        de = de + rng.uniform(-noise_bp, noise_bp, tenors.size) * 1e-4
        it = it + rng.uniform(-noise_bp, noise_bp, tenors.size) * 1e-4
    return QuoteSet.from_rates(tenors, de), QuoteSet.from_rates(tenors, it)
