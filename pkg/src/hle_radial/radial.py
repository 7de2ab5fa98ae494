"""Radial solutions of the PDE system and their qualitative checks.

A line pair ``(g, f)`` maps to a radial pair through

    u(r) = r^{-lambda1} g(-log r),    v(r) = r^{-lambda2} f(-log r),

so the uniform grid in ``s`` becomes a log-spaced grid in ``r``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .operators import LineGrid, TrajectoryPair, signed_power
from .params import ReducedParams, SystemParams

NOISE_FLOOR = 1e-6


@dataclass
class RadialSolution:
    """Samples of ``(u, v)`` at ``radii = exp(-s)`` for the nodes ``s`` of ``grid``."""

    radii: np.ndarray
    u: np.ndarray
    v: np.ndarray
    params: SystemParams
    red: ReducedParams
    grid: LineGrid


@dataclass
class DecayReport:
    """Tail sup estimates of ``|x|^{lambda1} u = g`` and ``|x|^{lambda2} v = f``.

    ``lim_*_inf`` refer to ``|x| -> infinity`` (``s -> -L``) and ``lim_*_0``
    to ``|x| -> 0`` (``s -> L``). ``window`` is the width of each tail in
    ``s``. ``limit_exists`` and ``tail_mean`` follow the same keys.
    """

    lim_u_inf: float
    lim_u_0: float
    lim_v_inf: float
    lim_v_0: float
    window: float
    limit_exists: dict
    tail_mean: dict

    def max_estimate(self) -> float:
        return max(self.lim_u_inf, self.lim_u_0, self.lim_v_inf, self.lim_v_0)


@dataclass
class P2Report:
    """Outcome of :func:`p2_qualitative_check`."""

    center: float
    evenness_defect: float
    even: bool
    positive: bool
    monotone: bool
    f_sign_ok: bool

    @property
    def passed(self) -> bool:
        return self.even and self.positive and self.monotone and self.f_sign_ok


def to_radial(t: TrajectoryPair, params: SystemParams) -> RadialSolution:
    """Map a line pair to radial samples on ``r in [e^{-L}, e^{L}]``."""
    red = t.red
    s = t.grid.s
    radii = np.exp(-s)
    u = np.exp(red.lambda1 * s) * t.g
    v = np.exp(red.lambda2 * s) * t.f
    return RadialSolution(radii, u, v, params, red, t.grid)


def from_radial(sol: RadialSolution) -> TrajectoryPair:
    """Inverse of :func:`to_radial`.

    Raises
    ------
    ValueError
        If ``radii`` is not ``exp(-s)`` on the nodes of ``sol.grid``.
    """
    s = sol.grid.s
    radii = np.asarray(sol.radii, dtype=float)
    if radii.shape != s.shape or np.max(np.abs(np.log(radii) + s)) > 1e-12 * max(1.0, sol.grid.L):
        raise ValueError("radii do not form the canonical log grid exp(-s)")
    g = np.exp(-sol.red.lambda1 * s) * sol.u
    f = np.exp(-sol.red.lambda2 * s) * sol.v
    return TrajectoryPair(sol.grid, g, f, sol.red)


def _laplacian(values, exponent, s, h, n):
    """Radial Laplacian from ``s``-derivatives, with the size of its parts.

    With ``r = e^{-s}`` and ``U(s) = w(r)`` one has
    ``Δw = (U_ss - (n-2) U_s) / r²``. Writing ``U = e^{k s} G`` with the
    decay exponent ``k``, the exponential is differentiated exactly and ``G``
    by central differences:

        Δw = r^{-2} e^{k s} (G'' + (2k - (n-2)) G' + k(k - (n-2)) G).

    Returns the Laplacian and the largest of the three summands, which is the
    local scale used to normalize residuals.
    """
    r2 = np.exp(-2.0 * s[1:-1])
    scale = np.exp(exponent * s)
    G = values / scale
    dG = (G[2:] - G[:-2]) / (2.0 * h)
    ddG = (G[2:] - 2.0 * G[1:-1] + G[:-2]) / (h * h)
    first = (2.0 * exponent - (n - 2)) * dG
    zeroth = exponent * (exponent - (n - 2)) * G[1:-1]
    factor = scale[1:-1] / r2
    size = np.maximum(np.maximum(np.abs(ddG), np.abs(first)), np.abs(zeroth))
    return factor * (ddG + first + zeroth), factor * size


def _pde_parts(sol: RadialSolution):
    params, red, grid = sol.params, sol.red, sol.grid
    s, h, n = grid.s, grid.h, params.n
    radii = sol.radii[1:-1]
    parts = []
    for values, exponent, weight, other, power in (
        (sol.u, red.lambda1, params.a, sol.v, red.p),
        (sol.v, red.lambda2, params.b, sol.u, red.q),
    ):
        lap, size = _laplacian(values, exponent, s, h, n)
        rhs = radii**weight * signed_power(other[1:-1], power)
        res = -lap - rhs
        denom = np.maximum(size, np.abs(rhs))
        ratio = np.divide(np.abs(res), denom, out=np.zeros_like(res), where=denom > 0)
        parts.append((res, ratio))
    return parts


def pde_relative_residuals(sol: RadialSolution) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise relative residuals of both equations; ``nan`` at the two endpoints."""
    out = []
    for _, ratio in _pde_parts(sol):
        full = np.full(sol.grid.nodes, np.nan)
        full[1:-1] = ratio
        out.append(full)
    return out[0], out[1]


def pde_residual(sol: RadialSolution, s_window: tuple | None = None):
    """Relative residuals of ``-Δu = r^a |v|^{p-2} v`` and ``-Δv = r^b |u|^{q-2} u``.

    Parameters
    ----------
    sol : RadialSolution
    s_window : (float, float), optional
        Restrict the sup-norms to nodes with ``s`` in this closed range.

    Returns
    -------
    r1, r2 : ndarray
        Absolute residuals at interior nodes.
    norms : tuple of float
        Sup over interior nodes of ``|r|`` divided by the largest local term:
        the right-hand side or one of the three parts of the Laplacian.
    """
    s = sol.grid.s[1:-1]
    inside = np.ones(s.size, dtype=bool)
    if s_window is not None:
        inside = (s >= s_window[0]) & (s <= s_window[1])
    parts = _pde_parts(sol)
    norms = tuple(float(np.max(ratio[inside])) if np.any(inside) else 0.0 for _, ratio in parts)
    return parts[0][0], parts[1][0], norms


def decay_limits(t: TrajectoryPair) -> DecayReport:
    """Sup of ``|g|`` and ``|f|`` over the outer 10% of the grid on each side.

    A limit counts as existing when the tail oscillation is below
    ``1e-3 (1 + tail sup)``; its value is then the tail mean.

    Raises
    ------
    ValueError
        If ``L < 10``.
    """
    grid = t.grid
    if grid.L < 10:
        raise ValueError("decay limits need L >= 10")
    s = grid.s
    window = 0.1 * grid.L
    near_inf = s <= -grid.L + window + 1e-12
    near_zero = s >= grid.L - window - 1e-12
    sups, exists, means = {}, {}, {}
    for key, values, mask in (
        ("u_inf", t.g, near_inf),
        ("u_0", t.g, near_zero),
        ("v_inf", t.f, near_inf),
        ("v_0", t.f, near_zero),
    ):
        tail = values[mask]
        sups[key] = float(np.max(np.abs(tail)))
        exists[key] = bool(np.ptp(tail) < 1e-3 * (1.0 + sups[key]))
        means[key] = float(np.mean(tail))
    return DecayReport(
        sups["u_inf"], sups["u_0"], sups["v_inf"], sups["v_0"], window, exists, means
    )


def peak_location(g: np.ndarray, grid: LineGrid) -> float:
    """Sub-node position of ``max g`` from a parabola through the top three nodes."""
    i = int(np.argmax(g))
    if i == 0 or i == g.size - 1:
        return float(grid.s[i])
    left, mid, right = g[i - 1], g[i], g[i + 1]
    curvature = left - 2.0 * mid + right
    offset = 0.0 if curvature == 0 else 0.5 * (left - right) / curvature
    return float(grid.s[i] + offset * grid.h)


def evenness_defect(g: np.ndarray, grid: LineGrid, center: float | None = None) -> float:
    """``sup_t |g(c + t) - g(c - t)|`` using a cubic spline through the nodes."""
    c = peak_location(g, grid) if center is None else center
    reach = grid.L - abs(c)
    t = np.arange(0.0, reach, grid.h)
    spline = CubicSpline(grid.s, g)
    return float(np.max(np.abs(spline(c + t) - spline(c - t))))


def profile_distance(g1: np.ndarray, g2: np.ndarray, grid: LineGrid, reach: float | None = None) -> float:
    """Distance between two profiles modulo translation, reflection and sign.

    Both profiles are oriented to a positive maximum and recentered at their
    sub-node peaks; the result is the smaller of the direct and reflected sup
    differences over ``|t| <= reach``, relative to ``max |g1|``.
    """
    g1 = g1 if np.max(g1) >= -np.min(g1) else -g1
    g2 = g2 if np.max(g2) >= -np.min(g2) else -g2
    c1, c2 = peak_location(g1, grid), peak_location(g2, grid)
    limit = grid.L - max(abs(c1), abs(c2))
    reach = limit if reach is None else min(reach, limit)
    t = np.arange(-reach, reach + 0.5 * grid.h, grid.h)
    a = CubicSpline(grid.s, g1)(c1 + t)
    b = CubicSpline(grid.s, g2)
    scale = np.max(np.abs(g1))
    direct = np.max(np.abs(a - b(c2 + t)))
    mirrored = np.max(np.abs(a - b(c2 - t)))
    return float(min(direct, mirrored) / scale)


def p2_qualitative_check(
    t: TrajectoryPair,
    tol: float = 1e-3,
    floor: float = NOISE_FLOOR,
    slack: float = 1e-10,
) -> P2Report:
    """Evenness, positivity, monotonicity and sign of ``f`` for ``p = 2``.

    Checks (i) ``sup_t |g(s*+t) - g(s*-t)| <= tol ||g||``, (ii) ``g > 0`` where
    ``max(|g|, |f|) > floor``, (iii) strict decrease away from ``s*`` (steps
    larger than ``slack`` in the wrong direction fail), and (iv) ``f`` has the
    sign of ``Gamma`` above the floor.

    Raises
    ------
    ValueError
        Unless ``p = 2``, ``q > 2``, ``Gamma != 0`` and ``A² + Gamma >= 0``.
    """
    red = t.red
    if red.p != 2 or not red.q > 2 or red.Gamma == 0 or red.A**2 + red.Gamma < 0:
        raise ValueError("p2 check requires p = 2, q > 2, Gamma != 0 and A^2 + Gamma >= 0")
    g, f, grid = t.g, t.f, t.grid
    center = peak_location(g, grid)
    defect = evenness_defect(g, grid, center)
    even = defect <= tol * np.max(np.abs(g))
    visible = np.maximum(np.abs(g), np.abs(f)) > floor
    positive = bool(np.all(g[visible] > 0))
    peak = int(np.argmax(g))
    steps = np.diff(g)
    above = (g[:-1] > floor) & (g[1:] > floor)
    rising_right = (steps > slack) & above & (np.arange(steps.size) >= peak)
    falling_left = (steps < -slack) & above & (np.arange(steps.size) < peak)
    monotone = not (np.any(rising_right) or np.any(falling_left))
    sign = 1.0 if red.Gamma > 0 else -1.0
    f_sign_ok = bool(np.all(sign * f[visible] > 0))
    return P2Report(center, defect, bool(even), positive, bool(monotone), f_sign_ok)

