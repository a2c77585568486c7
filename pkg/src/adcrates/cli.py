"""Command-line entry point: ``adcrates <subcommand> [options]``.

Every file written starts with ``#`` comment lines recording the package
version, the seed and a hash of the resolved configuration. Errors print a
single JSON line ``{"error": <code>, "message": <text>}`` to stderr and exit
with status 2; failed verification checks exit with status 1.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .adc import AdcParams
from .calibration import (
    CalibrationConfig,
    CalibrationError,
    calibrate_model1,
    calibrate_model2,
    config_from_mapping,
    params_from_mapping,
    read_flat_config,
)
from .cir import CirParams, ParameterError, transition_cdf
from .curves import (
    QuoteError,
    bootstrap_swaps,
    build_curve,
    curve_from_rates,
    read_quotes_csv,
    spread_curve,
)
from .mc import (
    Histogram2D,
    Model1,
    SimConfig,
    empirical_distribution,
    fd_edges,
    price_both_legs_mc,
    price_curve_mc,
    simulate,
)
from .pricing import model1_curves, zcb_price_cir
from . import verification

SEED_ENV = "ADCRATES_SEED"


class CliError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def parse_tenors(text: str) -> np.ndarray:
    """``a..b`` (inclusive integer range) or a comma-separated list."""
    try:
        if ".." in text:
            a, b = text.split("..")
            lo, hi = int(a), int(b)
            if lo < 1 or hi < lo:
                raise ValueError
            return np.arange(lo, hi + 1, dtype=float)
        vals = np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise CliError("bad_tenors", f"cannot parse tenors {text!r}; use a..b or a comma list") from None
    if np.any(vals <= 0.0) or np.any(np.diff(vals) <= 0.0):
        raise CliError("bad_tenors", "tenors must be positive and increasing")
    return vals


def _data_path(name: str) -> Path:
    return Path(str(resources.files("adcrates") / "data" / name))


def _input_path(path: str, kind: str) -> Path:
    """An existing file, else a bundled data file of that name."""
    p = Path(path)
    if not p.exists():
        p = _data_path(path)
        if not p.exists():
            raise CliError("file_not_found", f"no such {kind} {path!r}")
    return p


def load_mapping(path: str) -> dict[str, str]:
    p = Path(path)
    if not p.exists():
        bundled = _data_path(path if path.endswith(".cfg") else path + ".cfg")
        if not bundled.exists():
            raise CliError("file_not_found", f"no such config {path!r}")
        p = bundled
    return read_flat_config(p)


def load_model(kind: str, mapping: dict[str, str]):
    if kind == "cir":
        if "kappa" in mapping:
            keys = ("kappa", "theta", "sigma", "x0")
        else:
            keys = ("kappa_r", "theta_r", "sigma_r", "r0")
        try:
            return CirParams(*(float(mapping[k]) for k in keys))
        except KeyError as exc:
            raise CliError("bad_config", f"missing parameter {exc.args[0]}") from None
    model = params_from_mapping(mapping)
    if kind == "model1":
        return model if isinstance(model, Model1) else Model1(model.r, model.s)
    return model if isinstance(model, AdcParams) else model.degenerate_adc()


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise CliError("bad_seed", f"{SEED_ENV}={raw!r} is not an integer") from None


class Run:
    """Resolved configuration of one invocation plus header bookkeeping."""

    def __init__(self, command: str, seed: int, resolved: dict):
        self.command = command
        self.seed = seed
        self.resolved = {"command": command, "seed": seed, **resolved}
        blob = json.dumps(self.resolved, sort_keys=True, default=str)
        self.config_hash = hashlib.sha256(blob.encode()).hexdigest()[:16]
        self.blob = blob

    @property
    def header(self) -> list[str]:
        return [f"adcrates {__version__}", f"command: {self.command}", f"seed: {self.seed}",
                f"config_hash: {self.config_hash}"]

    def log(self) -> None:
        print(f"resolved config: {self.blob}", file=sys.stderr)


def _out(args, name: str) -> str:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return str(out / name)


def _write_table(path: str, header: list[str], names: list[str], rows) -> None:
    with open(path, "w") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write(",".join(names) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _model_resolved(kind: str, model) -> dict:
    if isinstance(model, CirParams):
        return {"model": kind, "params": model.__dict__}
    d = {"model": kind, "r": model.r.__dict__, "s": model.s.__dict__}
    if isinstance(model, AdcParams):
        d.update(eps_r=model.eps_r, eps_s=model.eps_s, gamma=model.gamma)
    return d


def cmd_simulate(args) -> int:
    seed = _seed(args)
    model = load_model(args.model, load_mapping(args.params))
    cfg = SimConfig(args.horizon, args.step, args.paths, seed, args.delta)
    try:
        times = [float(t) for t in args.times.split(",")] if args.times else [cfg.horizon]
    except ValueError:
        raise CliError("bad_times", f"cannot parse times {args.times!r}") from None
    # shrink the recording stride so every histogram time is stored
    every = max(args.record_every, 1)
    for t in times:
        k = cfg.step_index(t)
        every = math.gcd(every, k) if k else every
    run = Run("simulate", seed, {**_model_resolved(args.model, model), "sim": cfg.__dict__,
                                 "times": times, "record_every": every})
    run.log()
    batch = simulate(model, cfg, record_every=every)
    batch.to_csv(_out(args, "paths.csv"), run.header)
    comps = ("r",) if args.model == "cir" else ("r", "s", "joint")
    for t in times:
        for comp in comps:
            hist = empirical_distribution(batch, t, comp)
            hist.to_csv(_out(args, f"hist_{comp}_t{t:g}.csv"), run.header)
    print(f"wrote {len(times) * len(comps) + 1} files to {args.out}")
    return 0


def cmd_price(args) -> int:
    seed = _seed(args)
    model = load_model(args.model, load_mapping(args.params))
    tenors = parse_tenors(args.tenors)
    cfg = SimConfig(float(tenors.max()), args.step, args.paths, seed) if args.mc else None
    run = Run("price", seed, {**_model_resolved(args.model, model), "tenors": tenors.tolist(),
                              "mc": None if cfg is None else cfg.__dict__})
    run.log()
    cols: dict[str, np.ndarray] = {"tenor_years": tenors}
    if isinstance(model, CirParams):
        cols["risk_free"] = np.asarray(zcb_price_cir(model, model.x0, tenors))
    elif isinstance(model, Model1) or model.is_degenerate:
        base = model if isinstance(model, Model1) else Model1(model.r, model.s)
        de, it = model1_curves(base.r, base.s, tenors)
        cols["risk_free"] = np.exp(-de * tenors)
        cols["risky"] = np.exp(-it * tenors)
    if cfg is not None or isinstance(model, AdcParams) and not model.is_degenerate:
        if cfg is None:
            raise CliError("mc_required", "a correlated model has no closed form; pass --mc")
        if isinstance(model, CirParams):
            d = price_curve_mc(model, cfg, tenors)
            cols["risk_free_mc"] = np.array([x.value for x in d])
            cols["risk_free_mc_se"] = np.array([x.std_error for x in d])
        else:
            sim = model.degenerate_adc() if isinstance(model, Model1) else model
            d, i = price_both_legs_mc(sim, cfg, tenors)
            cols["risk_free_mc"] = np.array([x.value for x in d])
            cols["risk_free_mc_se"] = np.array([x.std_error for x in d])
            cols["risky_mc"] = np.array([x.value for x in i])
            cols["risky_mc_se"] = np.array([x.std_error for x in i])
    names = list(cols)
    rows = list(zip(*cols.values()))
    _write_table(_out(args, "prices.csv"), run.header, names, rows)
    print(" ".join(f"{n:>16}" for n in names))
    for row in rows:
        print(" ".join(f"{v:>16.10f}" for v in row))
    return 0


def cmd_curve(args) -> int:
    seed = _seed(args)
    tenors = parse_tenors(args.tenors)
    run = Run("curve", seed, {"quotes": args.quotes, "quotes_risky": args.quotes_risky,
                              "tenors": tenors.tolist()})
    run.log()

    def build(path):
        q = read_quotes_csv(_input_path(path, "quotes file"))
        if q.of_kind("swap_rate"):
            boot = bootstrap_swaps(q)
            return curve_from_rates(boot.knots, boot.knot_rates, eval_tenors=tenors)
        return build_curve(q, tenors)

    de = build(args.quotes)
    de.to_csv(_out(args, "curve_risk_free.csv"), run.header)
    written = 1
    if args.quotes_risky:
        it = build(args.quotes_risky)
        it.to_csv(_out(args, "curve_risky.csv"), run.header)
        spread_curve(it, de).to_csv(_out(args, "spread.csv"), run.header)
        written += 2
    print(f"wrote {written} files to {args.out}")
    return 0


def read_fixture(path: str):
    """Two zero curves from ``tenor_years,risk_free,risky`` rows."""
    p = _input_path(path, "fixture")
    rows = [ln for ln in p.read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    if rows[0].replace(" ", "") != "tenor_years,risk_free,risky":
        raise CliError("bad_fixture", "expected header tenor_years,risk_free,risky")
    data = np.array([[float(x) for x in ln.split(",")] for ln in rows[1:]])
    return curve_from_rates(data[:, 0], data[:, 1]), curve_from_rates(data[:, 0], data[:, 2])


def cmd_calibrate(args) -> int:
    seed = _seed(args)
    mapping = load_mapping(args.config) if args.config else {}
    cfg = config_from_mapping(mapping)
    cfg.seed = seed
    cfg.mc_cfg = SimConfig(cfg.mc_cfg.horizon, cfg.mc_cfg.step_h, cfg.mc_cfg.n_paths, seed,
                           cfg.mc_cfg.boundary_delta)
    de, it = read_fixture(args.fixture)
    if de.tenors.size != 30:
        raise CliError("bad_fixture", "calibration needs the 30 annual tenors 1..30")
    run = Run("calibrate", seed, {"model": args.model, "fixture": Path(args.fixture).name,
                                  "calibration": cfg.resolved()})
    run.log()
    if args.model == "model1":
        rep = calibrate_model1(de, it, cfg)
    elif args.model == "adc":
        rep = calibrate_model2(de, it, cfg)
    else:
        raise CliError("bad_model", "calibrate supports --model model1 or adc")
    paths = rep.write(_out(args, f"calibration_{args.model}"), run.header)
    print(f"objective {rep.objective!r}")
    print("wrote " + ", ".join(paths))
    return 0


def cmd_verify(args) -> int:
    seed = _seed(args)
    names = list(verification.SUITES) if args.suite == "all" else [args.suite]
    run = Run("verify", seed, {"suites": names, "nu": args.nu})
    run.log()
    ok = True
    for name in names:
        fn = verification.SUITES[name]
        kwargs = {"seed": seed}
        if name == "feller" and args.nu is not None:
            kwargs["nu"] = args.nu
        res = fn(**kwargs)
        for line in res.lines:
            print(f"[{name}] {line}")
        ok &= res.passed
    return 0 if ok else 1


def cmd_report(args) -> int:
    seed = _seed(args)
    model2 = load_model("adc", load_mapping(args.params))
    base = load_model("model1", load_mapping(args.params_base))
    cfg = SimConfig(args.t, args.step, args.paths, seed)
    run = Run("report", seed, {"model2": _model_resolved("adc", model2),
                               "model1": _model_resolved("model1", base), "sim": cfg.__dict__})
    run.log()
    batch = simulate(model2, cfg, record_every=cfg.n_steps)
    r = batch.samples(args.t, "r")
    s = batch.samples(args.t, "s")
    re_, se_ = fd_edges(r), fd_edges(s)
    masses, _, _ = np.histogram2d(r, s, bins=(re_, se_))
    hist = Histogram2D(re_, se_, masses / r.size)
    dens2 = hist.density()
    # exact model-1 bin masses from the product of the two transition laws
    cr = np.diff(transition_cdf(base.r, args.t, re_))
    cs = np.diff(transition_cdf(base.s, args.t, se_))
    area = np.outer(np.diff(re_), np.diff(se_))
    dens1 = np.outer(cr, cs) / area
    hist.to_csv(_out(args, "joint_density.csv"), run.header, values=dens2, column="density")
    hist.to_csv(_out(args, "density_difference.csv"), run.header, values=dens2 - dens1,
                column="difference")
    print(f"wrote joint_density.csv and density_difference.csv to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="adcrates", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"adcrates {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None,
                       help=f"random seed (default: ${SEED_ENV} or 0)")
        p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("simulate", help="Euler paths and histograms")
    common(p)
    p.add_argument("--model", choices=("cir", "model1", "adc"), default="model1")
    p.add_argument("--params", default="reference_model1")
    p.add_argument("--horizon", type=float, default=30.0)
    p.add_argument("--step", type=float, default=0.004)
    p.add_argument("--paths", type=int, default=5000)
    p.add_argument("--delta", type=float, default=1e-6)
    p.add_argument("--times", default=None, help="comma list of histogram times (default: horizon)")
    p.add_argument("--record-every", type=int, default=250)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("price", help="zero-coupon price table")
    common(p)
    p.add_argument("--model", choices=("cir", "model1", "adc"), default="model1")
    p.add_argument("--params", default="reference_model1")
    p.add_argument("--tenors", default="1..30")
    p.add_argument("--mc", action="store_true", help="add Monte Carlo prices")
    p.add_argument("--step", type=float, default=0.004)
    p.add_argument("--paths", type=int, default=5000)
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("curve", help="zero curves from quotes")
    common(p)
    p.add_argument("--quotes", required=True, help="risk-free quotes CSV")
    p.add_argument("--quotes-risky", default=None, help="risky quotes CSV")
    p.add_argument("--tenors", default="1..30")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("calibrate", help="fit a model to two zero curves")
    common(p)
    p.add_argument("--model", choices=("model1", "adc"), default="model1")
    p.add_argument("--fixture", required=True, help="CSV tenor_years,risk_free,risky")
    p.add_argument("--config", default=None, help="flat key = value calibration config")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("verify", help="run property suites")
    common(p)
    p.add_argument("--suite", choices=("all", *verification.SUITES), default="all")
    p.add_argument("--nu", type=float, default=None, help="nu for the feller suite")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="joint density grid and model difference")
    common(p)
    p.add_argument("--params", default="reference_model2")
    p.add_argument("--params-base", default="reference_model1")
    p.add_argument("--t", type=float, default=30.0)
    p.add_argument("--step", type=float, default=0.004)
    p.add_argument("--paths", type=int, default=100_000)
    p.set_defaults(func=cmd_report)
    return ap


def _error(code: str, message: str) -> int:
    print(json.dumps({"error": code, "message": message}), file=sys.stderr)
    return 2


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            return args.func(args)
    except CliError as exc:
        return _error(exc.code, str(exc))
    except ParameterError as exc:
        return _error(exc.code, str(exc))
    except QuoteError as exc:
        return _error("bad_quotes", str(exc))
    except CalibrationError as exc:
        return _error("bad_config", str(exc))
    except FileNotFoundError as exc:
        return _error("file_not_found", str(exc))
    except (ValueError, KeyError) as exc:
        return _error("invalid_input", str(exc))


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
