"""Bivariate asymptotically decoupling correlated (ADC) square-root model.

State (r, s) with drift A and diffusion matrix S = B B^T:

    S11 = sigma_r^2 r + eps_r r s
    S22 = sigma_s^2 s + eps_s r s
    S12 = gamma r s

    A1 = kappa_r (1 + beta_r s)(theta_r - r) + kappa_s alpha_s r (theta_s - s)
    A2 = kappa_s (1 + beta_s r)(theta_s - s) + kappa_r alpha_r s (theta_r - r)

with beta_i = eps_i / sigma_i^2 and alpha_i = gamma / sigma_i^2. The drift is
chosen so that the generator is symmetric with respect to the product of the
two factors' stationary Gamma laws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .cir import CirParams, ParameterError, stationary_density

# relative slack on gamma^2 <= eps_r eps_s, so rho = +-1 stays admissible
_ADMISSIBLE_RTOL = 1e-12


class StateVector(NamedTuple):
    r: float
    s: float


@dataclass(frozen=True)
class AdcParams:
    r: CirParams
    s: CirParams
    eps_r: float = 0.0
    eps_s: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        validate(self)

    @property
    def beta_r(self) -> float:
        return self.eps_r / self.r.sigma**2

    @property
    def beta_s(self) -> float:
        return self.eps_s / self.s.sigma**2

    @property
    def alpha_r(self) -> float:
        return self.gamma / self.r.sigma**2

    @property
    def alpha_s(self) -> float:
        return self.gamma / self.s.sigma**2

    @property
    def is_degenerate(self) -> bool:
        return self.eps_r == 0.0 and self.eps_s == 0.0 and self.gamma == 0.0

    @classmethod
    def from_rho(cls, r: CirParams, s: CirParams, eps_r: float, eps_s: float, rho: float):
        """Build with gamma = rho sqrt(eps_r eps_s), admissible for any rho in [-1, 1]."""
        if not -1.0 <= rho <= 1.0:
            raise ParameterError("gamma_inadmissible", f"rho must lie in [-1, 1], got {rho}")
        return cls(r, s, eps_r, eps_s, rho * math.sqrt(max(eps_r, 0.0) * max(eps_s, 0.0)))


def validate(p: AdcParams) -> AdcParams:
    """Check admissibility and return ``p`` unchanged.

    Raises :class:`ParameterError` with code ``nonpositive_cir``,
    ``negative_eps`` or ``gamma_inadmissible``.
    """
    for f in (p.r, p.s):
        if not isinstance(f, CirParams):
            raise ParameterError("nonpositive_cir", f"factor parameters must be CirParams, got {f!r}")
    for name in ("eps_r", "eps_s", "gamma"):
        if not math.isfinite(getattr(p, name)):
            raise ParameterError("negative_eps" if name != "gamma" else "gamma_inadmissible",
                                 f"{name} must be finite")
    if p.eps_r < 0.0 or p.eps_s < 0.0:
        raise ParameterError("negative_eps", f"eps_r, eps_s must be >= 0, got {p.eps_r}, {p.eps_s}")
    bound = p.eps_r * p.eps_s
    if p.gamma * p.gamma > bound * (1.0 + _ADMISSIBLE_RTOL):
        raise ParameterError(
            "gamma_inadmissible",
            f"gamma^2 = {p.gamma**2:g} exceeds eps_r * eps_s = {bound:g}",
        )
    return p


def _components(x) -> tuple[np.ndarray, np.ndarray]:
    r, s = x
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(r < 0.0) or np.any(s < 0.0):
        raise ValueError("state components must be >= 0")
    return r, s


def drift_components(p: AdcParams, r, s):
    """Unchecked drift (A1, A2); works elementwise on arrays."""
    kr, tr = p.r.kappa, p.r.theta
    ks, ts = p.s.kappa, p.s.theta
    a1 = kr * (1.0 + p.beta_r * s) * (tr - r) + ks * p.alpha_s * r * (ts - s)
    a2 = ks * (1.0 + p.beta_s * r) * (ts - s) + kr * p.alpha_r * s * (tr - r)
    return a1, a2


def diffusion_components(p: AdcParams, r, s):
    """Unchecked entries (S11, S12, S22); works elementwise on arrays."""
    rs = r * s
    return (p.r.sigma**2 * r + p.eps_r * rs, p.gamma * rs, p.s.sigma**2 * s + p.eps_s * rs)


def factor_components(s11, s12, s22):
    """Lower Cholesky entries (L11, L21, L22) of [[s11, s12], [s12, s22]].

    Where s11 = 0 the factor is continued as diag(0, sqrt(s22)).
    """
    l11 = np.sqrt(s11)
    with np.errstate(divide="ignore", invalid="ignore"):
        l21 = np.where(s11 > 0.0, s12 / np.where(s11 > 0.0, l11, 1.0), 0.0)
    l22 = np.sqrt(np.maximum(s22 - l21 * l21, 0.0))
    return l11, l21, l22


def drift(p: AdcParams, x) -> np.ndarray:
    r, s = _components(x)
    return np.array(drift_components(p, r, s))


def diffusion_matrix(p: AdcParams, x) -> np.ndarray:
    r, s = _components(x)
    s11, s12, s22 = diffusion_components(p, r, s)
    return np.array([[s11, s12], [s12, s22]])


def diffusion_det(p: AdcParams, x) -> float:
    """det S in the expanded form (cubic part plus quartic correlation part)."""
    r, s = _components(x)
    sr2, ss2 = p.r.sigma**2, p.s.sigma**2
    return (r * s * (r * p.eps_s * sr2 + s * p.eps_r * ss2 + sr2 * ss2)
            + r * r * s * s * (p.eps_r * p.eps_s - p.gamma**2))


def diffusion_factor(p: AdcParams, x, with_flag: bool = False):
    """Lower-triangular B with B B^T = S at ``x``.

    B = [[sqrt(S11), 0], [S12 / sqrt(S11), sqrt(det S / S11)]], the transpose
    of the upper-triangular form B^T B = S. On the r = 0 axis S11 vanishes and
    B is continued as diag(0, sqrt(S22)); ``with_flag=True`` also returns
    whether that boundary branch was taken.
    """
    r, s = _components(x)
    s11, s12, s22 = diffusion_components(p, r, s)
    l11, l21, l22 = factor_components(s11, s12, s22)
    b = np.array([[l11, np.zeros_like(l11)], [l21, l22]])
    if with_flag:
        return b, bool(np.any(s11 == 0.0))
    return b


def diffusion_eigen(p: AdcParams, x) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and unit eigenvectors (columns) of S. Diagnostic only."""
    vals, vecs = np.linalg.eigh(diffusion_matrix(p, x))
    return vals[::-1], vecs[:, ::-1]


def feller_multivariate(p: AdcParams) -> bool:
    """True when the joint origin is reachable: nu_r + nu_s < 1."""
    return p.r.nu + p.s.nu < 1.0


def stationary_joint_density(p: AdcParams, x) -> np.ndarray:
    """Product of the two factors' stationary Gamma densities.

    Independent of eps_r, eps_s and gamma.
    """
    r, s = _components(x)
    if np.any(r <= 0.0) or np.any(s <= 0.0):
        raise ValueError("stationary density is evaluated at interior points only")
    out = stationary_density(p.r, r) * stationary_density(p.s, s)
    return out


class ScalarField(NamedTuple):
    """A twice-differentiable function given by value, gradient and Hessian callbacks.

    Each callback takes ``(r, s)`` (scalars or equally shaped arrays); ``grad``
    returns a pair and ``hess`` returns ``(f_rr, f_rs, f_ss)``.
    """

    value: Callable
    grad: Callable
    hess: Callable


def generator_apply(p: AdcParams, f: ScalarField, x) -> np.ndarray:
    """(L f)(x) = A . grad f + 1/2 tr(S Hess f)."""
    r, s = _components(x)
    a1, a2 = drift_components(p, r, s)
    s11, s12, s22 = diffusion_components(p, r, s)
    fr, fs = f.grad(r, s)
    frr, frs, fss = f.hess(r, s)
    return a1 * fr + a2 * fs + 0.5 * (s11 * frr + 2.0 * s12 * frs + s22 * fss)


def monomial(i: int, j: int) -> ScalarField:
    """The field r^i s^j."""

    def value(r, s):
        return r**i * s**j

    def grad(r, s):
        gr = i * r ** max(i - 1, 0) * s**j if i else 0.0 * r
        gs = j * r**i * s ** max(j - 1, 0) if j else 0.0 * s
        return gr, gs

    def hess(r, s):
        rr = i * (i - 1) * r ** max(i - 2, 0) * s**j if i > 1 else 0.0 * r
        rs = i * j * r ** max(i - 1, 0) * s ** max(j - 1, 0) if i and j else 0.0 * r
        ss = j * (j - 1) * r**i * s ** max(j - 2, 0) if j > 1 else 0.0 * s
        return rr, rs, ss

    return ScalarField(value, grad, hess)


# 1, r, s, r s, r^2, s^2
POLYNOMIAL_FAMILY = tuple(monomial(i, j) for i, j in ((0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2)))


def stationary_quadrature(p: AdcParams, n: int = 40):
    """Nodes and weights integrating polynomials against the stationary product law.

    Generalized Gauss-Laguerre per axis: exact for polynomial integrands of
    degree <= 2n - 1 in each variable, including the x^(nu-1) endpoint
    behaviour when nu < 1.
    """
    from scipy.linalg import eigh_tridiagonal

    def axis(f: CirParams):
        # Golub-Welsch on the Laguerre recurrence; normalized weights never
        # form Gamma(nu), which overflows for the large shapes of fast factors
        a = f.nu - 1.0
        k = np.arange(1, n)
        y, vecs = eigh_tridiagonal(2.0 * np.arange(n) + a + 1.0, np.sqrt(k * (k + a)))
        w = vecs[0] ** 2
        return y / f.omega, w / w.sum()

    xr, wr = axis(p.r)
    xs, ws = axis(p.s)
    rr, ss = np.meshgrid(xr, xs, indexing="ij")
    return rr, ss, np.outer(wr, ws)


def weak_form_asymmetry(p: AdcParams, f: ScalarField, g: ScalarField, n: int = 40) -> tuple[float, float]:
    """Return (E_pi[f L g], E_pi[g L f]) under the stationary product law."""
    rr, ss, w = stationary_quadrature(p, n)
    x = (rr, ss)
    flg = np.sum(w * f.value(rr, ss) * generator_apply(p, g, x))
    glf = np.sum(w * g.value(rr, ss) * generator_apply(p, f, x))
    return float(flg), float(glf)


def weak_form_magnitude(p: AdcParams, f: ScalarField, g: ScalarField, n: int = 40) -> float:
    """E_pi[|f L g|] + E_pi[|g L f|]: the scale against which asymmetry is judged.

    A plain relative error is meaningless when both sides vanish (f = 1).
    """
    rr, ss, w = stationary_quadrature(p, n)
    x = (rr, ss)
    return float(np.sum(w * np.abs(f.value(rr, ss) * generator_apply(p, g, x)))
                 + np.sum(w * np.abs(g.value(rr, ss) * generator_apply(p, f, x))))
