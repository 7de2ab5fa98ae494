"""Grid functions on a truncated line and the linear operators of the reduced system.

With ``s = -log r`` the radial system becomes

    L+ g = |f|^{p-2} f,    L- f = |g|^{q-2} g,

where ``L+ = -d²/ds² + 2A d/ds + Gamma`` and ``L- = -d²/ds² - 2A d/ds + Gamma``.
Functions are sampled on a symmetric uniform grid over ``[-L, L]`` and are
extended by zero outside it. All derivatives are second-order central
differences, so the discrete ``L-`` is exactly the transpose of the discrete
``L+``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .params import ReducedParams

MAX_SPACING = 0.1


@dataclass(frozen=True)
class LineGrid:
    """Uniform grid with ``2 floor(L/h) + 1`` nodes on ``[-L, L]``.

    The stored spacing ``h`` is the effective one, ``L / floor(L/h)``, so that
    both endpoints are nodes and ``s = 0`` is the middle node.
    """

    L: float
    h: float
    half: int = field(init=False)

    def __post_init__(self):
        if not (self.L > 0 and self.h > 0):
            raise ValueError(f"grid: L and h must be positive, got L={self.L}, h={self.h}")
        half = int(math.floor(self.L / self.h + 1e-9))
        if half < 2:
            raise ValueError("grid: need at least two cells per half-line")
        h_eff = self.L / half
        if h_eff > MAX_SPACING * (1 + 1e-12):
            raise ValueError(f"grid: spacing {h_eff} exceeds the accuracy floor {MAX_SPACING}")
        object.__setattr__(self, "half", half)
        object.__setattr__(self, "h", h_eff)

    @property
    def nodes(self) -> int:
        return 2 * self.half + 1

    @property
    def s(self) -> np.ndarray:
        return self.h * np.arange(-self.half, self.half + 1, dtype=float)

    @property
    def center(self) -> int:
        return self.half

    @classmethod
    def from_nodes(cls, s: np.ndarray) -> "LineGrid":
        """Rebuild the grid from its node coordinates, rejecting non-canonical layouts."""
        s = np.asarray(s, dtype=float)
        if s.size < 5 or s.size % 2 == 0:
            raise ValueError("grid: node count must be odd and at least 5")
        grid = cls(L=float(-s[0]), h=float(-2 * s[0] / (s.size - 1)))
        if grid.nodes != s.size or np.max(np.abs(grid.s - s)) > 1e-9 * max(1.0, grid.L):
            raise ValueError("grid: nodes are not a symmetric uniform grid")
        return grid


@dataclass
class TrajectoryPair:
    """Samples ``(g, f)`` of a line solution on ``grid``."""

    grid: LineGrid
    g: np.ndarray
    f: np.ndarray
    red: ReducedParams

    def __post_init__(self):
        self.g = np.asarray(self.g, dtype=float)
        self.f = np.asarray(self.f, dtype=float)
        if self.g.shape != (self.grid.nodes,) or self.f.shape != (self.grid.nodes,):
            raise ValueError(f"trajectory: g and f need {self.grid.nodes} entries")


@dataclass
class HamiltonianState:
    """Canonical coordinates ``X = (g, f)`` and ``Y = (f' + A f, g' - A g)``.

    Entries may be scalars or equally shaped arrays.
    """

    X: tuple
    Y: tuple
    red: ReducedParams

    def as_vector(self) -> np.ndarray:
        return np.array([self.X[0], self.X[1], self.Y[0], self.Y[1]], dtype=float)

    @classmethod
    def from_vector(cls, z, red: ReducedParams) -> "HamiltonianState":
        return cls((z[0], z[1]), (z[2], z[3]), red)


def signed_power(t, r: float):
    """``|t|^{r-2} t`` evaluated as ``sign(t)|t|^{r-1}`` (zero at ``t = 0``)."""
    t = np.asarray(t, dtype=float)
    return np.sign(t) * np.abs(t) ** (r - 1.0)


def _padded(x: np.ndarray, width: int = 1) -> np.ndarray:
    return np.pad(np.asarray(x, dtype=float), width)


def first_derivative(x: np.ndarray, h: float) -> np.ndarray:
    """Central difference with zero extension beyond the endpoints."""
    xp = _padded(x)
    return (xp[2:] - xp[:-2]) / (2.0 * h)


def second_derivative(x: np.ndarray, h: float) -> np.ndarray:
    """Three-point second difference with zero extension."""
    xp = _padded(x)
    return (xp[2:] - 2.0 * xp[1:-1] + xp[:-2]) / (h * h)


def fourth_derivative(x: np.ndarray, h: float) -> np.ndarray:
    """Five-point fourth difference with zero extension."""
    xp = _padded(x, 2)
    return (xp[4:] - 4.0 * xp[3:-1] + 6.0 * xp[2:-2] - 4.0 * xp[1:-3] + xp[:-4]) / h**4


def apply_Lplus(g: np.ndarray, grid: LineGrid, red: ReducedParams) -> np.ndarray:
    """``-g'' + 2A g' + Gamma g`` at every node."""
    h = grid.h
    return -second_derivative(g, h) + 2.0 * red.A * first_derivative(g, h) + red.Gamma * np.asarray(g)


def apply_Lminus(f: np.ndarray, grid: LineGrid, red: ReducedParams) -> np.ndarray:
    """``-f'' - 2A f' + Gamma f`` at every node."""
    h = grid.h
    return -second_derivative(f, h) - 2.0 * red.A * first_derivative(f, h) + red.Gamma * np.asarray(f)


def lplus_matrix(nodes: int, h: float, A: float, Gamma: float) -> sp.csc_matrix:
    """Sparse tridiagonal matrix of ``L+``; its transpose is ``L-``."""
    lower = np.full(nodes - 1, -1.0 / h**2 - A / h)
    diag = np.full(nodes, 2.0 / h**2 + Gamma)
    upper = np.full(nodes - 1, -1.0 / h**2 + A / h)
    return sp.diags([lower, diag, upper], [-1, 0, 1], format="csc")


def energy_terms(t: TrajectoryPair) -> tuple[np.ndarray, ...]:
    """The four summands ``g'f'``, ``-Gamma g f``, ``|g|^q/q``, ``|f|^p/p``."""
    h, red = t.grid.h, t.red
    gp = first_derivative(t.g, h)
    fp = first_derivative(t.f, h)
    return (
        gp * fp,
        -red.Gamma * t.g * t.f,
        np.abs(t.g) ** red.q / red.q,
        np.abs(t.f) ** red.p / red.p,
    )


def energy(t: TrajectoryPair) -> np.ndarray:
    """Conserved energy ``g'f' - Gamma g f + |g|^q/q + |f|^p/p`` at each node."""
    return sum(energy_terms(t))


def hamiltonian(st: HamiltonianState):
    """``H = y1 y2 + A(x1 y1 - x2 y2) - (A² + Gamma) x1 x2 + |x1|^q/q + |x2|^p/p``.

    Evaluated in extended precision to keep conservation diagnostics clean.
    """
    red = st.red
    x1, x2 = (np.asarray(v, dtype=np.longdouble) for v in st.X)
    y1, y2 = (np.asarray(v, dtype=np.longdouble) for v in st.Y)
    A = np.longdouble(red.A)
    Gamma = np.longdouble(red.Gamma)
    value = (
        y1 * y2
        + A * (x1 * y1 - x2 * y2)
        - (A * A + Gamma) * x1 * x2
        + np.abs(x1) ** np.longdouble(red.q) / np.longdouble(red.q)
        + np.abs(x2) ** np.longdouble(red.p) / np.longdouble(red.p)
    )
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


def state_from_pair(t: TrajectoryPair) -> HamiltonianState:
    """Canonical coordinates of a sampled pair, with central-difference derivatives."""
    h, A = t.grid.h, t.red.A
    gp = first_derivative(t.g, h)
    fp = first_derivative(t.f, h)
    return HamiltonianState((t.g, t.f), (fp + A * t.f, gp - A * t.g), t.red)


def system_residual(t: TrajectoryPair):
    """Residuals of the reduced system.

    Returns
    -------
    r1, r2 : ndarray
        ``L+ g - |f|^{p-2} f`` and ``L- f - |g|^{q-2} g`` at every node.
    norms : tuple of float
        Sup-norms over interior nodes.
    """
    red = t.red
    r1 = apply_Lplus(t.g, t.grid, red) - signed_power(t.f, red.p)
    r2 = apply_Lminus(t.f, t.grid, red) - signed_power(t.g, red.q)
    norms = (float(np.max(np.abs(r1[1:-1]))), float(np.max(np.abs(r2[1:-1]))))
    return r1, r2, norms


def fourth_order_residual(g: np.ndarray, grid: LineGrid, red: ReducedParams) -> np.ndarray:
    """Residual of ``g'''' - 2(2A² + Gamma) g'' + Gamma² g - |g|^{q-2} g`` for ``p = 2``.

    Uses the five-point fourth difference; meaningful at nodes ``2 .. N-3``.
    """
    if red.p != 2:
        raise ValueError(f"fourth-order equation needs p = 2, got p = {red.p}")
    h = grid.h
    g = np.asarray(g, dtype=float)
    return (
        fourth_derivative(g, h)
        - 2.0 * (2.0 * red.A**2 + red.Gamma) * second_derivative(g, h)
        + red.Gamma**2 * g
        - signed_power(g, red.q)
    )
