"""Closed forms for the weighted Rellich constant and the radial isometry check.

For radial ``u`` and weight ``|x|^alpha`` the substitution
``u(r) = r^{kappa} g(-log r)`` with ``kappa = (n + alpha - 2 theta)/theta``
turns ``int |x|^alpha |Δu|^theta dx`` into ``int |g'' - 2A g' - Gamma g|^theta ds``
(up to the sphere area), with

    Gamma = ((n+alpha)/theta - 2)(n - (n+alpha)/theta),
    A = (2(theta - alpha) + n(theta - 2)) / (2 theta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .operators import LineGrid


@dataclass(frozen=True)
class RellichParams:
    """Dimension, exponent and weight with the derived ``Gamma`` and ``A``."""

    n: int
    theta: float
    alpha: float
    Gamma_appx: float = field(init=False)
    A_appx: float = field(init=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"dimension: n must be an integer >= 2, got {self.n}")
        if not self.theta > 1:
            raise ValueError(f"exponent: theta > 1 required, got {self.theta}")
        object.__setattr__(self, "Gamma_appx", gamma_appendix(self.n, self.theta, self.alpha))
        object.__setattr__(self, "A_appx", a_appendix(self.n, self.theta, self.alpha))


def gamma_appendix(n: int, theta: float, alpha: float) -> float:
    """``((n+alpha)/theta - 2)(n - (n+alpha)/theta)``."""
    if not theta > 1:
        raise ValueError(f"exponent: theta > 1 required, got {theta}")
    ratio = (n + alpha) / theta
    return (ratio - 2.0) * (n - ratio)


def a_appendix(n: int, theta: float, alpha: float) -> float:
    """``(2(theta - alpha) + n(theta - 2)) / (2 theta)``."""
    return (2.0 * (theta - alpha) + n * (theta - 2.0)) / (2.0 * theta)


def mu2(n: int, alpha: float) -> tuple[float, int]:
    """``min over k >= 0 of |Gamma + k(n-2+k)|²`` for ``theta = 2``.

    ``k -> Gamma + k(n-2+k)`` increases, so the scan stops one past the
    first ``k`` where the value exceeds ``|Gamma|``.

    Returns
    -------
    value : float
        The minimal square.
    k : int
        The first minimizing index.
    """
    if int(n) != n or n < 2:
        raise ValueError(f"dimension: n must be an integer >= 2, got {n}")
    gamma = gamma_appendix(n, 2.0, alpha)
    k_stop = 0
    while gamma + k_stop * (n - 2 + k_stop) <= abs(gamma):
        k_stop += 1
    best_value, best_k = math.inf, 0
    for k in range(k_stop + 2):
        value = (gamma + k * (n - 2 + k)) ** 2
        if value < best_value:
            best_value, best_k = value, k
    return best_value, best_k


def mu_theta(n: int, theta: float, alpha: float) -> float:
    """``|Gamma|^theta`` when ``Gamma >= 0``.

    For ``Gamma < 0`` the value is known only at ``theta = 2``, where
    :func:`mu2` is returned.

    Raises
    ------
    ValueError
        If ``Gamma < 0`` and ``theta != 2`` (formula unavailable).
    """
    gamma = gamma_appendix(n, theta, alpha)
    if gamma >= 0:
        return abs(gamma) ** theta
    if theta == 2:
        return mu2(n, alpha)[0]
    raise ValueError("formula unavailable: Gamma < 0 with theta != 2")


def theta_double_star(n: int, theta: float) -> float:
    """``theta n / (n - 2 theta)`` if ``n > 2 theta``, else ``inf`` (no upper bound)."""
    if not theta > 1:
        raise ValueError(f"exponent: theta > 1 required, got {theta}")
    if n > 2 * theta:
        return theta * n / (n - 2 * theta)
    return math.inf


def _trapezoid(values: np.ndarray, x: np.ndarray) -> float:
    return float(np.sum(0.5 * (values[1:] + values[:-1]) * np.diff(x)))


def radial_isometry_check(u: np.ndarray, grid: LineGrid, n: int, theta: float, alpha: float):
    """Compare ``int |x|^alpha |Δu|^theta`` with its line form.

    ``u`` is sampled at ``r = exp(-s)`` on ``grid``. The left side uses
    three-point stencils on the nonuniform radial grid and the trapezoid
    rule in ``r`` (sphere area divided out); the right side transforms to
    ``g = e^{-kappa s} u`` and uses uniform central differences in ``s``. The
    two discretizations are independent, so the defect measures the
    change-of-variables identity to second order.

    Returns
    -------
    lhs, rhs, defect : float
        ``defect = |lhs - rhs| / max(lhs, tiny)``.
    """
    params = RellichParams(n, theta, alpha)
    u = np.asarray(u, dtype=float)
    s, h = grid.s, grid.h
    r = np.exp(-s)[::-1]
    w = u[::-1]
    left = r[1:-1] - r[:-2]
    right = r[2:] - r[1:-1]
    total = left * right * (left + right)
    second = 2.0 * (w[2:] * left - w[1:-1] * (left + right) + w[:-2] * right) / total
    first = (w[2:] * left**2 - w[:-2] * right**2 + w[1:-1] * (right**2 - left**2)) / total
    laplacian = second + (n - 1) * first / r[1:-1]
    lhs = _trapezoid(r[1:-1] ** (alpha + n - 1) * np.abs(laplacian) ** theta, r[1:-1])

    kappa = (n + alpha - 2.0 * theta) / theta
    g = np.exp(-kappa * s) * u
    dg = (g[2:] - g[:-2]) / (2.0 * h)
    ddg = (g[2:] - 2.0 * g[1:-1] + g[:-2]) / (h * h)
    integrand = np.abs(ddg - 2.0 * params.A_appx * dg - params.Gamma_appx * g[1:-1]) ** theta
    rhs = _trapezoid(integrand, s[1:-1])
    defect = abs(lhs - rhs) / max(lhs, np.finfo(float).tiny)
    return lhs, rhs, defect
