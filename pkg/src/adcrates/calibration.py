"""Fitting the one- and two-factor models to a risk-free and a risky zero curve.

The objective is the sum of squared differences of risk-free zero rates plus
the sum of squared differences of spreads (risky minus risk-free), both on
the curves' tenor grid. Residuals are reported as fitted minus observed, in
basis points, for the risk-free and the risky curve.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.optimize import least_squares

from .adc import AdcParams
from .cir import CirParams, ParameterError
from .curves import YieldCurve
from .mc import Model1, SimConfig, draw_normals, price_both_legs_mc
from .optimize import AnnealingSchedule, coordinate_search, simulated_annealing
from .pricing import bond_coeffs, model1_curves

MODEL1_NAMES = ("kappa_r", "theta_r", "sigma_r", "r0", "kappa_s", "theta_s", "sigma_s", "s0")
MODEL2_NAMES = MODEL1_NAMES + ("eps_r", "eps_s", "rho")

DEFAULT_BOUNDS: dict[str, tuple[float, float]] = {
    "kappa_r": (1e-3, 10.0),
    "theta_r": (1e-4, 0.2),
    "sigma_r": (1e-3, 0.5),
    "r0": (1e-5, 0.2),
    "kappa_s": (1e-3, 10.0),
    "theta_s": (1e-5, 0.1),
    "sigma_s": (1e-3, 0.5),
    "s0": (1e-6, 0.1),
    "eps_r": (0.0, 1.0),
    "eps_s": (0.0, 1.0),
    "rho": (-1.0, 1.0),
}

POLISH_METHODS = ("least_squares", "coordinate")

# curves below this curvature (objective units per unit parameter^2) are flagged
CURVATURE_FLOOR = 1e-6


class CalibrationError(ValueError):
    pass


@dataclass
class CalibrationConfig:
    bounds: dict[str, tuple[float, float]] = field(default_factory=lambda: dict(DEFAULT_BOUNDS))
    schedule: AnnealingSchedule = field(default_factory=AnnealingSchedule)
    mc_cfg: SimConfig = field(default_factory=lambda: SimConfig(30.0, 0.004, 5000, 0))
    weights: tuple[float, float] = (1.0, 1.0)
    tol: float = 0.0
    max_evals: int = 20000
    seed: int = 0
    polish_evals: int = 2000
    polish_method: str = "coordinate"

    def __post_init__(self):
        for name, (lo, hi) in self.bounds.items():
            if not lo <= hi:
                raise CalibrationError(f"empty bound for {name}: ({lo}, {hi})")
            if name.startswith(("kappa", "theta", "sigma")) or name in ("r0", "s0"):
                if lo <= 0.0:
                    raise CalibrationError(f"lower bound of {name} must be > 0")
            if name in ("eps_r", "eps_s") and lo < 0.0:
                raise CalibrationError(f"lower bound of {name} must be >= 0")
            if name == "rho" and (lo < -1.0 or hi > 1.0):
                raise CalibrationError("rho bounds must lie within [-1, 1]")
        if self.polish_method not in POLISH_METHODS:
            raise CalibrationError(f"polish_method must be one of {POLISH_METHODS}")

    def box(self, names) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array([self.bounds[n][0] for n in names])
        hi = np.array([self.bounds[n][1] for n in names])
        return lo, hi

    def resolved(self) -> dict:
        d = {
            "bounds": {k: list(v) for k, v in sorted(self.bounds.items())},
            "schedule": dataclasses.asdict(self.schedule),
            "mc_cfg": dataclasses.asdict(self.mc_cfg),
            "weights": list(self.weights),
            "tol": self.tol,
            "max_evals": self.max_evals,
            "seed": self.seed,
            "polish_evals": self.polish_evals,
            "polish_method": self.polish_method,
        }
        return d

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.resolved(), sort_keys=True).encode()).hexdigest()[:16]


def read_flat_config(path) -> dict[str, str]:
    """Read ``key = value`` lines (``#`` comments, no sections) into a dict."""
    with open(path) as fh:
        text = fh.read()
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    parser.optionxform = str
    parser.read_string("[flat]\n" + text)
    return dict(parser["flat"])


def config_from_mapping(values: Mapping[str, str]) -> CalibrationConfig:
    cfg = CalibrationConfig()
    bounds = dict(cfg.bounds)
    sched = {}
    mc = dataclasses.asdict(cfg.mc_cfg)
    for key, raw in values.items():
        if key.startswith("bound_"):
            lo, hi = (float(x) for x in raw.split(","))
            name = key[len("bound_"):]
            if name not in DEFAULT_BOUNDS:
                raise CalibrationError(f"unknown parameter in {key}")
            bounds[name] = (lo, hi)
        elif key.startswith("sa_"):
            name = key[3:]
            if name == "t0":
                sched[name] = None if raw.strip().lower() in ("", "auto", "none") else float(raw)
            elif name in ("steps_per_stage", "reanneal_after"):
                sched[name] = int(raw)
            elif name in ("decay", "width"):
                sched[name] = float(raw)
            else:
                raise CalibrationError(f"unknown annealing key {key}")
        elif key.startswith("mc_"):
            name = key[3:]
            if name not in mc:
                raise CalibrationError(f"unknown simulation key {key}")
            mc[name] = int(raw) if name in ("n_paths", "seed") else float(raw)
        elif key == "weight_de":
            cfg.weights = (float(raw), cfg.weights[1])
        elif key == "weight_spread":
            cfg.weights = (cfg.weights[0], float(raw))
        elif key == "tol":
            setattr(cfg, key, float(raw))
        elif key in ("max_evals", "seed", "polish_evals"):
            setattr(cfg, key, int(raw))
        elif key == "polish_method":
            cfg.polish_method = raw.strip()
        # model parameter keys are read by params_from_mapping
    cfg.bounds = bounds
    cfg.schedule = AnnealingSchedule(**sched)
    cfg.mc_cfg = SimConfig(**mc)
    cfg.__post_init__()
    return cfg


def params_from_mapping(values: Mapping[str, str]):
    """Model parameters from a flat mapping.

    Returns ``Model1`` when no correlation key is present, otherwise
    ``AdcParams`` (``gamma`` or ``rho`` may be given).
    """
    try:
        r = CirParams(float(values["kappa_r"]), float(values["theta_r"]), float(values["sigma_r"]),
                      float(values["r0"]))
        s = CirParams(float(values["kappa_s"]), float(values["theta_s"]), float(values["sigma_s"]),
                      float(values["s0"]))
    except KeyError as exc:
        raise CalibrationError(f"missing model parameter {exc.args[0]}") from None
    if not any(k in values for k in ("eps_r", "eps_s", "gamma", "rho")):
        return Model1(r, s)
    eps_r = float(values.get("eps_r", 0.0))
    eps_s = float(values.get("eps_s", 0.0))
    if "rho" in values:
        return AdcParams.from_rho(r, s, eps_r, eps_s, float(values["rho"]))
    return AdcParams(r, s, eps_r, eps_s, float(values.get("gamma", 0.0)))


def _spreads(de: YieldCurve, it: YieldCurve) -> np.ndarray:
    if not np.array_equal(de.tenors, it.tenors):
        raise CalibrationError("risk-free and risky curves must share a tenor grid")
    return it.zero_rates - de.zero_rates


def objective_model1(pr: CirParams, ps: CirParams, de: YieldCurve, it: YieldCurve,
                     r0: float | None = None, s0: float | None = None,
                     weights: tuple[float, float] = (1.0, 1.0)) -> float:
    """Sum of squared risk-free-rate and spread differences under the closed form."""
    tenors = de.tenors
    model_de, model_it = model1_curves(pr, ps, tenors, r0, s0)
    res_de = model_de - de.zero_rates
    res_sp = (model_it - model_de) - _spreads(de, it)
    return weights[0] * math.fsum(res_de**2) + weights[1] * math.fsum(res_sp**2)


def model2_curves(p: AdcParams, tenors, mc_cfg: SimConfig, normals: np.ndarray | None = None
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Monte Carlo zero rates (risk-free, risky) on ``tenors``."""
    tenors = np.asarray(tenors, dtype=float)
    d, i = price_both_legs_mc(p, mc_cfg, tenors, normals=normals)
    pd = np.array([x.value for x in d])
    pi = np.array([x.value for x in i])
    return -np.log(pd) / tenors, -np.log(pi) / tenors


def objective_model2(p: AdcParams, de: YieldCurve, it: YieldCurve, mc_cfg: SimConfig,
                     r0: float | None = None, s0: float | None = None,
                     weights: tuple[float, float] = (1.0, 1.0),
                     normals: np.ndarray | None = None) -> float:
    """Same objective with Monte Carlo prices; the seed in ``mc_cfg`` fixes the random numbers."""
    if r0 is not None or s0 is not None:
        p = dataclasses.replace(
            p,
            r=dataclasses.replace(p.r, x0=p.r.x0 if r0 is None else r0),
            s=dataclasses.replace(p.s, x0=p.s.x0 if s0 is None else s0),
        )
    res = residuals_model2(p, de, it, mc_cfg, weights, normals)
    return math.fsum(res**2)


def residuals_model2(p: AdcParams, de: YieldCurve, it: YieldCurve, mc_cfg: SimConfig,
                     weights: tuple[float, float] = (1.0, 1.0),
                     normals: np.ndarray | None = None) -> np.ndarray:
    """Weighted residuals whose squares sum to the model-2 objective: rates first, then spreads."""
    model_de, model_it = model2_curves(p, de.tenors, mc_cfg, normals)
    res_de = model_de - de.zero_rates
    res_sp = (model_it - model_de) - _spreads(de, it)
    return np.concatenate([math.sqrt(weights[0]) * res_de, math.sqrt(weights[1]) * res_sp])


class _BudgetSpent(Exception):
    pass


def _least_squares_polish(res_fn, x0: np.ndarray, lo: np.ndarray, hi: np.ndarray, scales: np.ndarray,
                          max_evals: int):
    """Bounded trust-region least squares on the residual vector, capped at ``max_evals`` calls.

    With common random numbers the residuals are smooth in the parameters, so
    forward differences give usable Jacobians. Returns (x, f, n_evals, history,
    converged), where converged means a trf stopping test fired inside the budget.
    """
    best = [x0.copy(), math.inf]
    history: list[float] = []

    def fun(x):
        if len(history) >= max_evals:
            raise _BudgetSpent
        r = res_fn(x)
        f = math.fsum(r**2) if np.all(np.isfinite(r)) else math.inf
        history.append(f)
        if f < best[1]:
            best[0], best[1] = x.copy(), f
        # scaled to bp so trf's tolerances act on a unit-sized problem
        return np.where(np.isfinite(r), r, 1.0) * 1e4

    x0 = np.clip(x0, lo, hi)
    # trf needs a strictly interior start
    pad = 1e-9 * (hi - lo)
    x0 = np.minimum(np.maximum(x0, lo + pad), hi - pad)
    try:
        sol = least_squares(fun, x0, bounds=(lo, hi), method="trf", x_scale=scales, diff_step=1e-4,
                            xtol=1e-12, ftol=1e-12, gtol=None, max_nfev=max_evals)
        converged = sol.status > 0
    except _BudgetSpent:
        converged = False
    return best[0], best[1], len(history), history, converged


@dataclass
class CalibrationReport:
    model: str
    params: dict[str, float]
    objective: float
    tenors: np.ndarray
    residuals_de_bp: np.ndarray
    residuals_it_bp: np.ndarray
    n_evals: int
    converged: bool
    seed: int
    trace: dict = field(default_factory=dict)
    curvature: dict[str, float] = field(default_factory=dict)
    flat_directions: list[str] = field(default_factory=list)
    start_objective: float | None = None

    def fitted_model(self):
        return params_from_mapping({k: repr(v) for k, v in self.params.items()})

    def to_text(self) -> str:
        lines = [f"model: {self.model}", f"seed: {self.seed}", f"objective: {self.objective!r}",
                 f"evaluations: {self.n_evals}", f"converged: {self.converged}"]
        if self.start_objective is not None:
            lines.append(f"start_objective: {self.start_objective!r}")
        lines.append("parameters:")
        lines += [f"  {k} = {v!r}" for k, v in self.params.items()]
        if self.curvature:
            lines.append("curvature (objective second difference per parameter):")
            lines += [f"  {k} = {v!r}" for k, v in self.curvature.items()]
            lines.append(f"flat directions: {', '.join(self.flat_directions) or 'none'}")
        for k, v in self.trace.items():
            if isinstance(v, list):
                lines.append(f"trace.{k}: {len(v)} entries")
            else:
                lines.append(f"trace.{k}: {v}")
        lines.append("residual convention: fitted minus observed, basis points")
        return "\n".join(lines) + "\n"

    def write(self, prefix, header_lines=()) -> list[str]:
        """Write ``<prefix>.txt``, ``<prefix>_params.csv`` and ``<prefix>_residuals.csv``."""
        head = "".join(f"# {h}\n" for h in header_lines)
        paths = [f"{prefix}.txt", f"{prefix}_params.csv", f"{prefix}_residuals.csv"]
        with open(paths[0], "w") as fh:
            fh.write(head + self.to_text())
        with open(paths[1], "w", newline="") as fh:
            fh.write(head)
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["parameter", "value"])
            for k, v in self.params.items():
                w.writerow([k, repr(v)])
        with open(paths[2], "w", newline="") as fh:
            fh.write(head)
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["tenor_years", "risk_free_bp", "risky_bp"])
            for t, a, b in zip(self.tenors, self.residuals_de_bp, self.residuals_it_bp):
                w.writerow([repr(float(t)), repr(float(a)), repr(float(b))])
        return paths


def _cir(x) -> CirParams:
    return CirParams(float(x[0]), float(x[1]), float(x[2]), float(x[3]))


def _factor_rates(x, tenors: np.ndarray):
    """-log(price) / tenor for one CIR factor started at x[3]; accepts complex x."""
    log_f, g = bond_coeffs(x[0], x[1], x[2], tenors)
    return -(log_f - g * x[3]) / tenors


def _to_u(x):
    # (kappa, kappa theta, sigma^2, x0): the rates are much closer to linear here
    return np.array([x[0], x[0] * x[1], x[2] * x[2], x[3]], dtype=x.dtype)


def _to_x(u):
    return np.array([u[0], u[1] / u[0], np.sqrt(u[2]), u[3]], dtype=u.dtype)


def _complex_step_jacobian(fun, u: np.ndarray, m: int) -> np.ndarray:
    jac = np.empty((m, u.size))
    for j in range(u.size):
        h = 1e-30 * max(abs(u[j]), 1e-300)
        v = u.astype(complex)
        v[j] += 1j * h
        jac[:, j] = np.imag(fun(v)) / h
    return jac


def _gauss_newton(residual_fn, x0: np.ndarray, lo: np.ndarray, hi: np.ndarray,
                  max_iter: int = 200) -> tuple[np.ndarray, float, int, bool]:
    """Backtracking Gauss-Newton in (kappa, kappa theta, sigma^2, x0) with exact derivatives.

    The Jacobian comes from complex-step differentiation, so it is accurate to
    rounding even though the spread factor's conditioning reaches ~1e10.
    """
    def res_u(u):
        return residual_fn(_to_x(u))

    def sq(x):
        return math.fsum(residual_fn(x) ** 2)

    x = np.clip(x0, lo, hi)
    best = sq(x)
    n = 1
    stalled = False
    for _ in range(max_iter):
        u = _to_u(x)
        r = res_u(u)
        jac = _complex_step_jacobian(res_u, u, r.size)
        scale = np.abs(u)
        du = np.linalg.lstsq(jac * scale, -r, rcond=None)[0] * scale
        t = 1.0
        while t > 1e-8:
            v = u + t * du
            if np.all(v > 0.0):
                y = np.clip(_to_x(v), lo, hi)
                fy = sq(y)
                n += 1
                if fy < best:
                    break
            t *= 0.5
        else:
            stalled = True
            break
        x, best = y, fy
    return x, best, n, stalled


def _fit_factor(residual_fn, names, cfg: CalibrationConfig, starts) -> tuple[np.ndarray, float, int, bool]:
    """Multi-start bounded least squares, then a Gauss-Newton polish of the best start."""
    lo, hi = cfg.box(names)
    best = None
    n_evals = 0

    def safe(x):
        try:
            return residual_fn(x) * 1e4
        except (ParameterError, FloatingPointError, ValueError):
            return np.full(30, 1.0)

    for x0 in starts:
        x0 = np.clip(np.asarray(x0, dtype=float), lo, hi)
        sol = least_squares(safe, x0, bounds=(lo, hi), method="trf", x_scale="jac",
                            xtol=1e-15, ftol=None, gtol=None, max_nfev=400)
        n_evals += sol.nfev
        f = math.fsum(sol.fun**2) * 1e-8
        if best is None or f < best[1]:
            best = (sol.x, f)
    x, f, n, stalled = _gauss_newton(residual_fn, best[0], lo, hi)
    return x, f, n_evals + n, stalled


def _starts(cfg: CalibrationConfig, names, curve_level: float, short: float) -> list[np.ndarray]:
    lo, hi = cfg.box(names)
    out = []
    for kappa in (0.05, 0.5, 3.0):
        for sig_frac in (0.3, 1.0):
            theta = max(curve_level, lo[1] * 2)
            sigma = min(math.sqrt(2 * kappa * theta / (4.0 * sig_frac)), hi[2])
            out.append(np.clip([kappa, theta, sigma, max(short, lo[3] * 2)], lo, hi))
    return out


def _model_residuals_bp(de, it, model_de, model_it):
    return (model_de - de.zero_rates) * 1e4, (model_it - it.zero_rates) * 1e4


def calibrate_model1(de: YieldCurve, it: YieldCurve, cfg: CalibrationConfig | None = None) -> CalibrationReport:
    """Two-step fit: risk-free factor on the risk-free curve, then the spread factor on the spread."""
    cfg = cfg or CalibrationConfig()
    tenors = de.tenors
    spread = _spreads(de, it)
    rf_names = MODEL1_NAMES[:4]
    sp_names = MODEL1_NAMES[4:]
    w_de, w_sp = (math.sqrt(w) for w in cfg.weights)

    def rf_res(x):
        return w_de * (_factor_rates(x, tenors) - de.zero_rates)

    starts = _starts(cfg, rf_names, float(de.zero_rates[-1]), float(de.zero_rates[0]))
    x_r, f_r, n_r, ok_r = _fit_factor(rf_res, rf_names, cfg, starts)
    pr = _cir(x_r)

    def sp_res(x):
        return w_sp * (_factor_rates(x, tenors) - spread)

    starts = _starts(cfg, sp_names, max(float(spread.mean()), 1e-4), max(float(spread[0]), 1e-5))
    x_s, f_s, n_s, ok_s = _fit_factor(sp_res, sp_names, cfg, starts)
    ps = _cir(x_s)

    obj = objective_model1(pr, ps, de, it, weights=cfg.weights)
    res_de, res_it = _model_residuals_bp(de, it, *model1_curves(pr, ps, tenors))
    params = dict(zip(MODEL1_NAMES, [*map(float, x_r), *map(float, x_s)]))

    def f_all(x):
        try:
            return objective_model1(_cir(x[:4]), _cir(x[4:]), de, it, weights=cfg.weights)
        except ParameterError:
            return math.inf

    curv = _curvature(f_all, np.concatenate([x_r, x_s]), MODEL1_NAMES, cfg)
    return CalibrationReport(
        model="model1", params=params, objective=obj, tenors=tenors.copy(),
        residuals_de_bp=res_de, residuals_it_bp=res_it, n_evals=n_r + n_s,
        converged=bool(ok_r and ok_s), seed=cfg.seed,
        trace={"step1_objective": f_r, "step2_objective": f_s},
        curvature=curv, flat_directions=[k for k, v in curv.items() if v < CURVATURE_FLOOR],
    )


def _curvature(f, x, names, cfg: CalibrationConfig, rel_step: float = 1e-3) -> dict[str, float]:
    """Central second differences of ``f`` along each coordinate, steps relative to the box width."""
    lo, hi = cfg.box(names)
    f0 = f(x)
    out = {}
    for i, name in enumerate(names):
        h = rel_step * (hi[i] - lo[i])
        up, dn = x.copy(), x.copy()
        up[i] = min(x[i] + h, hi[i])
        dn[i] = max(x[i] - h, lo[i])
        hu, hd = up[i] - x[i], x[i] - dn[i]
        if hu <= 0 or hd <= 0:
            out[name] = math.nan
            continue
        fu, fd = f(up), f(dn)
        out[name] = float(2.0 * (hd * fu + hu * fd - (hu + hd) * f0) / (hu * hd * (hu + hd)))
    return out


def adc_from_vector(x) -> AdcParams:
    return AdcParams.from_rho(_cir(x[:4]), _cir(x[4:8]), float(x[8]), float(x[9]), float(x[10]))


def calibrate_model2(de: YieldCurve, it: YieldCurve, cfg: CalibrationConfig | None = None,
                     start: Mapping[str, float] | None = None) -> CalibrationReport:
    """Simulated annealing on the Monte Carlo objective, then a local polish.

    gamma is searched as rho * sqrt(eps_r * eps_s) with rho in [-1, 1], so
    every evaluated point is admissible. The start defaults to the model-1
    calibration with eps_r = eps_s = rho = 0. Random numbers are drawn once
    and shared by all evaluations.
    """
    cfg = cfg or CalibrationConfig()
    names = MODEL2_NAMES
    lo, hi = cfg.box(names)
    if start is None:
        m1 = calibrate_model1(de, it, cfg)
        start = {**m1.params, "eps_r": 0.0, "eps_s": 0.0, "rho": 0.0}
    x0 = np.clip(np.array([start[n] for n in names], dtype=float), lo, hi)
    mc_cfg = cfg.mc_cfg
    last = int(round(float(de.tenors.max()) / mc_cfg.step_h))
    normals = draw_normals(mc_cfg, last)

    cache: dict[bytes, float] = {}

    def f(x):
        key = np.asarray(x, dtype=float).tobytes()
        if key not in cache:
            try:
                # coarse steps can blow up for extreme proposals; those score +inf
                with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                    val = objective_model2(adc_from_vector(x), de, it, mc_cfg,
                                           weights=cfg.weights, normals=normals)
            except ParameterError:
                val = math.inf
            cache[key] = val if math.isfinite(val) else math.inf
        return cache[key]

    # proposals scale with each parameter's own size; parameters starting at 0 use the box
    scales = np.where(x0 != 0.0, np.abs(x0), hi - lo)
    rng = np.random.default_rng(cfg.seed)
    sa = simulated_annealing(f, x0, lo, hi, cfg.schedule, rng,
                             max_evals=max(cfg.max_evals - cfg.polish_evals, 1), tol=cfg.tol,
                             scales=scales)
    if cfg.polish_method == "coordinate":
        polish = coordinate_search(f, sa.x, lo, hi, tol=1e-10, max_evals=cfg.polish_evals)
        px, pf, pn, phist, pconv = polish.x, polish.fun, polish.n_evals, polish.history, polish.converged
    else:
        def res(x):
            try:
                with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                    return residuals_model2(adc_from_vector(x), de, it, mc_cfg, cfg.weights, normals)
            except ParameterError:
                return np.full(2 * de.tenors.size, np.inf)

        px, pf, pn, phist, pconv = _least_squares_polish(res, sa.x, lo, hi, scales, cfg.polish_evals)
    x_best, f_best = (px, pf) if pf <= sa.fun else (sa.x, sa.fun)
    best = adc_from_vector(x_best)
    model_de, model_it = model2_curves(best, de.tenors, mc_cfg, normals)
    res_de, res_it = _model_residuals_bp(de, it, model_de, model_it)
    params = dict(zip(names, map(float, x_best)))
    params["gamma"] = float(best.gamma)
    curv = _curvature(f, x_best, names, cfg)
    best_path = sa.trace.best + [min(sa.trace.best[-1], v) for v in phist]
    return CalibrationReport(
        model="model2", params=params, objective=float(f_best), tenors=de.tenors.copy(),
        residuals_de_bp=res_de, residuals_it_bp=res_it, n_evals=sa.n_evals + pn,
        converged=bool(sa.converged or pconv), seed=cfg.seed,
        trace={"accepted": sa.trace.accepted, "rejected": sa.trace.rejected,
               "reanneals": sa.trace.reanneals, "temperatures": sa.trace.temperatures,
               "best_so_far": np.minimum.accumulate(best_path).tolist()},
        curvature=curv, flat_directions=[k for k, v in curv.items() if v < CURVATURE_FLOOR],
        start_objective=sa.start_fun,
    )
