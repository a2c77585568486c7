"""Empirical checks of the models' structural properties.

Each suite returns a ``SuiteResult`` whose ``lines`` are the measured
statistics, one per check, suitable for printing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .adc import POLYNOMIAL_FAMILY, AdcParams, weak_form_asymmetry, weak_form_magnitude
from .cir import CirParams, sample_exact, stationary_cdf
from .mc import (
    Model1,
    SimConfig,
    comparison_sum_check,
    hitting_probability,
    ks_test,
    price_both_legs_mc,
    resolving_step,
    simulate,
)
from .pricing import model1_curves

REFERENCE_MODEL1 = Model1(CirParams(0.0398, 0.0544, 0.0455, 0.0346),
                          CirParams(4.0049, 0.0029, 0.0258, 0.0004))
REFERENCE_MODEL2 = AdcParams(CirParams(0.0636, 0.0455, 0.0387, 0.0339),
                             CirParams(3.3345, 0.0026, 0.0423, 0.0019),
                             eps_r=0.3859, eps_s=0.2046, gamma=0.2800)

# rates of the one-factor hitting experiments
FELLER_KAPPA = 0.125
FELLER_THETA = 0.02
FELLER_X0 = 0.005
FELLER_HORIZON = 5.0


@dataclass
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


@dataclass
class SuiteResult:
    suite: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def lines(self) -> list[str]:
        return [c.line() for c in self.checks]


def stationarity(p: CirParams = REFERENCE_MODEL1.r, t: float = 200.0, n: int = 100_000,
                 seed: int = 0, level: float = 0.01) -> SuiteResult:
    """Exact transition draws at a long horizon against the stationary Gamma law."""
    rng = np.random.default_rng(seed)
    x = sample_exact(p, p.x0, t, rng, size=n)
    ks = ks_test(x, lambda v: stationary_cdf(p, v), level)
    return SuiteResult("stationarity", [Check(
        f"exact draws at t={t:g} vs Gamma(nu={p.nu:.6g}, scale={p.stationary_scale:.6g})",
        ks.passed, f"KS={ks.statistic:.6g} critical={ks.critical:.6g} n={n}")])


def decoupling(p: AdcParams = REFERENCE_MODEL2, t: float = 30.0, n_paths: int = 100_000,
               step_h: float = 0.001, seed: int = 0, start: str = "stationary",
               level: float = 0.01, n_se: float = 3.0) -> SuiteResult:
    """Euler marginals at ``t`` against the product-Gamma law, plus their correlation.

    ``start="stationary"`` draws the initial states from the product of the
    two Gamma laws, so the check measures invariance of that law under the
    coupled dynamics; ``start="x0"`` starts every path at (r0, s0).
    """
    cfg = SimConfig(t, step_h, n_paths, seed)
    init = None
    if start == "stationary":
        rng = np.random.default_rng([seed, 1])
        init = (rng.gamma(p.r.nu, p.r.stationary_scale, n_paths),
                rng.gamma(p.s.nu, p.s.stationary_scale, n_paths))
    elif start != "x0":
        raise ValueError(f"unknown start {start!r}")
    batch = simulate(p, cfg, record_every=cfg.n_steps, initial=init)
    r, s = batch.samples(t, "r"), batch.samples(t, "s")
    res = SuiteResult("decoupling")
    for name, x, f in (("r", r, p.r), ("s", s, p.s)):
        ks = ks_test(x, lambda v, f=f: stationary_cdf(f, v), level)
        res.checks.append(Check(f"{name} marginal at t={t:g} vs Gamma(nu={f.nu:.6g})", ks.passed,
                                f"KS={ks.statistic:.6g} critical={ks.critical:.6g} n={n_paths} "
                                f"h={cfg.step_h:g} start={start}"))
    corr = float(np.corrcoef(r, s)[0, 1])
    se = 1.0 / math.sqrt(n_paths)
    res.checks.append(Check(f"corr(r, s) at t={t:g} near zero", abs(corr) <= n_se * se,
                            f"corr={corr:.4g} se={se:.3g} bound={n_se:g} se"))
    return res


REFERENCE_TABLE = {
    # (kappa, theta, sigma, eps) -> (nu, beta) as printed
    "model1 r": ((0.0398, 0.0544, 0.0455, 0.0), (2.0857, 0.0)),
    "model1 s": ((4.0049, 0.0029, 0.0258, 0.0), (35.0593, 0.0)),
    "model2 r": ((0.0636, 0.0455, 0.0387, 0.3859), (3.8728, 258.0)),
    "model2 s": ((3.3345, 0.0026, 0.0423, 0.2046), (9.6116, 114.0)),
}


def table_consistency(nu_tol: float = 0.01, beta_tol: float = 0.02, seed: int = 0) -> SuiteResult:
    """nu = 2 kappa theta / sigma^2 and beta = eps / sigma^2 against the printed values.

    ``seed`` is unused; it keeps the suite signature uniform.
    """
    res = SuiteResult("table")
    for name, ((kappa, theta, sigma, eps), (nu_ref, beta_ref)) in REFERENCE_TABLE.items():
        nu = 2.0 * kappa * theta / sigma**2
        dnu = abs(nu - nu_ref) / nu_ref
        res.checks.append(Check(f"{name} nu", dnu <= nu_tol,
                                f"computed={nu:.6g} printed={nu_ref:g} rel={dnu:.3g} tol={nu_tol:g}"))
        beta = eps / sigma**2
        if beta_ref == 0.0:
            ok, detail = beta == 0.0, f"computed={beta:g} printed=0"
        else:
            db = abs(beta - beta_ref) / beta_ref
            ok, detail = db <= beta_tol, f"computed={beta:.6g} printed={beta_ref:g} rel={db:.3g} tol={beta_tol:g}"
        res.checks.append(Check(f"{name} beta", ok, detail))
    return res


def random_admissible(rng: np.random.Generator) -> AdcParams:
    def factor():
        kappa = rng.uniform(0.05, 5.0)
        theta = rng.uniform(0.001, 0.1)
        sigma = rng.uniform(0.01, 0.3)
        return CirParams(kappa, theta, sigma, theta)

    r, s = factor(), factor()
    eps_r, eps_s = rng.uniform(0.0, 0.5, 2)
    return AdcParams.from_rho(r, s, float(eps_r), float(eps_s), float(rng.uniform(-1.0, 1.0)))


def reversibility(n_sets: int = 10, seed: int = 0, tol: float = 1e-5) -> SuiteResult:
    """Weak-form symmetry E[f Lg] = E[g Lf] over the polynomial family.

    The relative asymmetry is |E[f Lg] - E[g Lf]| / (E[|f Lg|] + E[|g Lf|]).
    """
    rng = np.random.default_rng(seed)
    worst_rel = 0.0
    worst_abs = 0.0
    for _ in range(n_sets):
        p = random_admissible(rng)
        for i, f in enumerate(POLYNOMIAL_FAMILY):
            for g in POLYNOMIAL_FAMILY[i + 1:]:
                a, b = weak_form_asymmetry(p, f, g)
                diff = abs(a - b)
                worst_abs = max(worst_abs, diff)
                worst_rel = max(worst_rel, diff / weak_form_magnitude(p, f, g))
    return SuiteResult("reversibility", [Check(
        f"{n_sets} random admissible parameter sets, 6 polynomials",
        worst_rel <= tol, f"max relative asymmetry={worst_rel:.3g} max absolute={worst_abs:.3g} tol={tol:g}")])


def feller_params(nu: float) -> CirParams:
    """One-factor parameters with the requested nu (kappa, theta fixed, sigma solved)."""
    sigma = math.sqrt(2.0 * FELLER_KAPPA * FELLER_THETA / nu)
    return CirParams(FELLER_KAPPA, FELLER_THETA, sigma, FELLER_X0)


def feller_check(p: CirParams, horizon: float, n_paths: int = 10_000, seed: int = 0,
                 delta: float = 1e-6) -> Check:
    """Origin hitting of one factor at a step resolving ``delta``; expected zero iff nu >= 1."""
    h = resolving_step(p, delta)
    cfg = SimConfig(horizon, h, n_paths, seed, delta)
    est = hitting_probability(p, cfg)
    if p.nu >= 1.0:
        ok = est.n_hits == 0
        expect = "no hits"
    else:
        ok = est.significantly_positive()
        expect = "> 3 binomial SE"
    return Check(f"nu={p.nu:.6g} ({expect})", ok,
                 f"hits={est.n_hits}/{n_paths} p={est.probability:.4g} se={est.std_error:.3g} "
                 f"h={cfg.step_h:.3g} delta={delta:g} horizon={horizon:g}y")


def feller(nu: float | None = None, seed: int = 0, n_paths: int = 10_000) -> SuiteResult:
    res = SuiteResult("feller")
    if nu is not None:
        res.checks.append(feller_check(feller_params(nu), FELLER_HORIZON, n_paths, seed))
        return res
    pr = REFERENCE_MODEL1.r
    res.checks.append(feller_check(CirParams(pr.kappa, pr.theta, pr.sigma, pr.theta), 30.0, n_paths, seed))
    res.checks.append(feller_check(feller_params(0.5), FELLER_HORIZON, n_paths, seed))
    return res


def joint_feller_params(nu_each: float, kappa: float = 0.5, theta: float = 0.02) -> AdcParams:
    sigma = math.sqrt(2.0 * kappa * theta / nu_each)
    f = CirParams(kappa, theta, sigma, theta)
    return AdcParams(f, f)


def joint_feller(nu_each: float, horizon: float = 5.0, n_paths: int = 10_000, seed: int = 0,
                 delta: float = 1e-6) -> tuple[Check, Check]:
    """Joint-origin and per-axis hitting for two identical factors."""
    p = joint_feller_params(nu_each)
    cfg = SimConfig(horizon, resolving_step(p, delta), n_paths, seed, delta)
    est = hitting_probability(p, cfg)
    n_axes = [round(a * n_paths) for a in est.axis_probabilities]
    axes_ok = all(k > 0 and k / n_paths > 3 * math.sqrt((k / n_paths) * (1 - k / n_paths) / n_paths)
                  for k in n_axes)
    total = 2 * nu_each
    if total >= 1.0:
        ok, expect = not est.significantly_positive(), "statistically zero"
    else:
        ok, expect = est.significantly_positive(), "> 3 binomial SE"
    detail = (f"hits={est.n_hits}/{n_paths} p={est.probability:.4g} se={est.std_error:.3g} "
              f"h={cfg.step_h:.3g} delta={delta:g}")
    return (Check(f"nu1=nu2={nu_each:g} joint origin ({expect})", ok, detail),
            Check(f"nu1=nu2={nu_each:g} each axis hit", axes_ok,
                  f"axis frequencies r={est.axis_probabilities[0]:.4g} s={est.axis_probabilities[1]:.4g}"))


def mc_vs_closed_form(model: Model1 = REFERENCE_MODEL1, step_h: float = 0.004, n_paths: int = 5000,
                      seed: int = 0, tol_bp: float = 5.0) -> SuiteResult:
    """Degenerate correlated model by Monte Carlo against the closed-form curves."""
    tenors = np.arange(1.0, 31.0)
    cfg = SimConfig(30.0, step_h, n_paths, seed)
    d, i = price_both_legs_mc(model.degenerate_adc(), cfg, tenors)
    mc_de = -np.log([x.value for x in d]) / tenors
    mc_it = -np.log([x.value for x in i]) / tenors
    cf_de, cf_it = model1_curves(model.r, model.s, tenors)
    res = SuiteResult("mc")
    for leg, a, b in (("risk-free", mc_de, cf_de), ("risky", mc_it, cf_it)):
        err = float(np.max(np.abs(a - b))) * 1e4
        res.checks.append(Check(f"{leg} zero rates, tau=1..30, h={cfg.step_h:g}, N={n_paths}",
                                err <= tol_bp, f"max |MC - closed form|={err:.4g}bp tol={tol_bp:g}bp"))
    return res


def comparison(kappa: float = 0.5, nus=(1.0, 1.0), t: float = 2.0, n_paths: int = 100_000,
               step_h: float = 0.001, seed: int = 0) -> SuiteResult:
    """Sum of scaled equal-kappa factors against the one-dimensional CIR transition law."""
    theta = 0.02
    factors = []
    for nu in nus:
        sigma = math.sqrt(2.0 * kappa * theta / nu)
        factors.append(CirParams(kappa, theta, sigma, theta))
    rep = comparison_sum_check(factors, SimConfig(t, step_h, n_paths, seed))
    return SuiteResult("comparison", [Check(
        f"kappa={kappa:g} nus={tuple(nus)} t={t:g}", rep.ks.passed,
        f"KS={rep.ks.statistic:.6g} critical={rep.ks.critical:.6g} n={n_paths} h={step_h:g}")])


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "stationarity": stationarity,
    "reversibility": reversibility,
    "feller": feller,
    "mc": mc_vs_closed_form,
    "comparison": comparison,
    "decoupling": decoupling,
    "table": table_consistency,
}
