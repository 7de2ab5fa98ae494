"""Variational construction of line solutions and nonnegative nonexistence probes.

A solution of the reduced system is obtained from a minimizer of

    m = min  h sum |L+ g|^{p'}   subject to   h sum |g|^q = 1,

followed by ``f = |L+ g|^{p'-2} L+ g`` and a rescaling that absorbs the
Lagrange multiplier. The minimization runs in the dual (mirror) variable
``f``: each iterate is ``g = L+^{-1} |f|^{p-2} f`` normalized onto the
constraint, so ``L+ g = |f|^{p-2} f`` holds exactly and only the second
equation has to be driven to zero.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spl

from .operators import (
    LineGrid,
    TrajectoryPair,
    apply_Lplus,
    lplus_matrix,
    signed_power,
    system_residual,
)
from .params import ReducedParams, SystemParams, derive_reduced

EPS = np.finfo(float).eps


class NonConvergenceError(RuntimeError):
    """Raised when a solver result needed downstream did not converge."""


@dataclass(frozen=True)
class SolverOptions:
    """Options shared by the minimizer and the nonnegativity probe.

    Attributes
    ----------
    tol : float
        Relative stationarity target: the interior sup-norm of the rescaled
        residual must drop below ``tol * (1 + m)``.
    max_iter : int
        Iteration cap per start.
    seed : int
        Seed for the random multistart bumps.
    multistarts : int
        Number of starts; start 0 is the centered Gaussian.
    objective_rtol : float
        Relative slack allowed on the objective when accepting a step, to
        absorb summation round-off near the minimum.
    max_step, min_step : float
        Bounds of the adaptive step in the mirror variable. Steps above 2
        amplify the high-frequency part of the mirror iterate, which the
        objective barely sees; the cap keeps it damped.
    trivial_tol : float
        Sup-norm below which a probe iterate counts as collapsed.
    probe_max_step : float
        Step cap of the probe, kept below 1 so the decay trend is recorded.
    """

    tol: float = 1e-8
    max_iter: int = 200_000
    seed: int = 0
    multistarts: int = 1
    objective_rtol: float = 64 * EPS
    max_step: float = 1.0
    min_step: float = 1e-14
    trivial_tol: float = 1e-6
    probe_max_step: float = 0.5
    probe_max_iter: int = 2000

    def __post_init__(self):
        if not (self.tol > 0 and self.max_iter > 0 and self.multistarts > 0):
            raise ValueError("solver options: tol, max_iter and multistarts must be positive")


@dataclass
class VariationalResult:
    """Outcome of :func:`minimize_quotient`.

    Attributes
    ----------
    pair : TrajectoryPair
        Rescaled solution candidate of the reduced system.
    m : float
        Objective at the unit-constraint minimizer.
    mu : float
        Lagrange multiplier; equals ``m`` at a stationary point.
    iterations : int
        Accepted plus rejected outer iterations of the selected start.
    converged : bool
        Whether both residual norms reached ``tol * (1 + m)``.
    residual_norms : tuple of float
        Interior sup-norms of the system residual of ``pair``.
    start_index : int
        Which multistart produced the result.
    objective_history : list of float
        Objective after each accepted step of the selected start.
    start_values : list of tuple
        ``(m, converged)`` for every start, in start order.
    """

    pair: TrajectoryPair
    m: float
    mu: float
    iterations: int
    converged: bool
    residual_norms: tuple
    start_index: int = 0
    objective_history: list = field(default_factory=list)
    start_values: list = field(default_factory=list)


@dataclass
class ProbeRun:
    g_sup: float
    f_sup: float
    best_residual: float
    iterations: int
    collapsed: bool
    history: list


@dataclass
class ProbeReport:
    """Outcome of :func:`nonneg_probe`.

    ``verdict`` is ``"collapse"`` when every start ends with sup-norm below
    ``trivial_tol``, which is consistent with the nonexistence of nonnegative
    decaying solutions; otherwise ``"residual-floor"`` with ``floor`` the
    smallest residual reached by a non-collapsing start.
    """

    verdict: str
    floor: float
    runs: list


class _DirichletInverse:
    """``L+^{-1}`` and its adjoint on the truncated line with zero extension."""

    def __init__(self, nodes: int, h: float, A: float, Gamma: float):
        mat = lplus_matrix(nodes, h, A, Gamma)
        self.solve = spl.factorized(mat)
        self.solve_adjoint = spl.factorized(mat.T.tocsc())


class _MarchingInverse:
    """One-sided inverse of ``L+`` that marches from one end of the line.

    For ``Gamma < 0`` both characteristic exponents of ``L+`` have the same
    sign, so the two-point Dirichlet problem is badly conditioned on a long
    interval. Marching in the direction of decay (starting from zero at the
    upstream end) is stable and is the natural whole-line inverse: the
    equation holds at every node except the last one reached.
    """

    def __init__(self, nodes: int, h: float, A: float, Gamma: float):
        self.forward = A <= 0
        a = A if self.forward else -A
        band = np.zeros((3, nodes))
        band[0, :] = -1.0 / h**2 + a / h
        band[1, :-1] = 2.0 / h**2 + Gamma
        band[2, :-2] = -1.0 / h**2 - a / h
        band[0, 0] = 1.0
        band[1, 0] = 0.0
        self._band = band
        upper = np.zeros((3, nodes))
        upper[2, :] = band[0, :]
        upper[1, 1:] = band[1, :-1]
        upper[0, 2:] = band[2, :-2]
        self._band_t = upper

    def solve(self, r: np.ndarray) -> np.ndarray:
        r = r if self.forward else r[::-1]
        rhs = np.empty_like(r)
        rhs[0] = 0.0
        rhs[1:] = r[:-1]
        x = sla.solve_banded((2, 0), self._band, rhs)
        return x if self.forward else x[::-1]

    def solve_adjoint(self, r: np.ndarray) -> np.ndarray:
        r = r if self.forward else r[::-1]
        y = sla.solve_banded((0, 2), self._band_t, r)
        out = np.zeros_like(r)
        out[:-1] = y[1:]
        return out if self.forward else out[::-1]


def _inverse(grid: LineGrid, A: float, Gamma: float):
    if Gamma > 0:
        return _DirichletInverse(grid.nodes, grid.h, A, Gamma)
    return _MarchingInverse(grid.nodes, grid.h, A, Gamma)


def recover_f(g: np.ndarray, grid: LineGrid, red: ReducedParams) -> np.ndarray:
    """``f = |L+ g|^{p'-2} L+ g``."""
    return signed_power(apply_Lplus(g, grid, red), red.p_conj)


def rescale_to_solution(
    g_unit: np.ndarray,
    mu: float,
    grid: LineGrid,
    red: ReducedParams,
    f_unit: np.ndarray | None = None,
) -> TrajectoryPair:
    """Turn a unit-constraint minimizer into a solution of the reduced system.

    Scales ``g`` by ``c = mu^{1/(q-p')}``. When the mirror iterate ``f_unit``
    is supplied it is scaled by ``c^{p'-1}``; it coincides with
    ``recover_f(g_unit)`` up to round-off and avoids re-amplifying tail noise.

    Raises
    ------
    NonConvergenceError
        If ``mu <= 0``.
    """
    if not mu > 0:
        raise NonConvergenceError(f"multiplier mu = {mu} is not positive; stationarity not reached")
    c = mu ** (1.0 / (red.q - red.p_conj))
    g = c * np.asarray(g_unit, dtype=float)
    if f_unit is None:
        f = recover_f(g, grid, red)
    else:
        f = c ** (red.p_conj - 1.0) * np.asarray(f_unit, dtype=float)
    return TrajectoryPair(grid, g, f, red)


def _start_profiles(grid: LineGrid, count: int, seed: int) -> list[np.ndarray]:
    s = grid.s
    profiles = [np.exp(-0.5 * s**2)]
    rng = np.random.default_rng(seed)
    span = grid.L / 6.0
    for _ in range(count - 1):
        center = rng.uniform(-span, span)
        width = rng.uniform(0.5, 2.0)
        skew = rng.uniform(-0.5, 0.5)
        z = (s - center) / width
        profiles.append(np.exp(-0.5 * z**2) * (1.0 + skew * np.tanh(z)))
    return profiles


@dataclass
class _UnitRun:
    g: np.ndarray
    f: np.ndarray
    m: float
    iterations: int
    converged: bool
    history: list


def _descend(A, Gamma, p, q, grid, g0, opts: SolverOptions) -> _UnitRun:
    h = grid.h
    inv = _inverse(grid, A, Gamma)
    mat_minus = lplus_matrix(grid.nodes, h, A, Gamma).T.tocsr()
    p_conj = p / (p - 1.0)

    def project(f):
        g = inv.solve(signed_power(f, p))
        c = (h * np.sum(np.abs(g) ** q)) ** (-1.0 / q)
        f = f * c ** (1.0 / (p - 1.0))
        return f, g * c, h * np.sum(np.abs(f) ** p)

    f, g, J = project(signed_power(mat_minus.T @ g0, p_conj))
    step = 1.0
    history = [J]
    converged = False
    k = 0
    for k in range(1, opts.max_iter + 1):
        phi_g = signed_power(g, q)
        # residual of the second equation after rescaling by c = J^{1/(q-p')}
        scale = J ** ((p_conj - 1.0) / (q - p_conj))
        residual = scale * np.max(np.abs((mat_minus @ f - J * phi_g)[1:-1]))
        if residual <= opts.tol * (1.0 + J):
            converged = True
            break
        direction = f - J * inv.solve_adjoint(phi_g)
        while True:
            f_new, g_new, J_new = project(f - step * direction)
            if J_new <= J * (1.0 + opts.objective_rtol) or step < opts.min_step:
                break
            step *= 0.5
        if step < opts.min_step:
            break
        f, g, J = f_new, g_new, J_new
        history.append(J)
        step = min(1.5 * step, opts.max_step)
    return _UnitRun(g, f, J, k, converged, history)


def _run_starts(A, Gamma, p, q, grid, opts) -> tuple[int, list[_UnitRun]]:
    runs = [
        _descend(A, Gamma, p, q, grid, g0, opts)
        for g0 in _start_profiles(grid, opts.multistarts, opts.seed)
    ]
    ranked = sorted(range(len(runs)), key=lambda i: (not runs[i].converged, runs[i].m, i))
    return ranked[0], runs


def _require_admissible(red: ReducedParams):
    if red.Gamma == 0.0:
        raise ValueError("degenerate: Gamma = 0, variational existence requires Gamma != 0")
    if red.A**2 + red.Gamma < 0:
        raise ValueError("coefficients: A^2 + Gamma >= 0 required")


def minimize_quotient(red: ReducedParams, grid: LineGrid, opts: SolverOptions | None = None) -> VariationalResult:
    """Minimize ``h sum |L+ g|^{p'}`` on ``h sum |g|^q = 1`` and rescale to a solution.

    Deterministic for fixed options. With several starts the converged start
    with the smallest objective wins, ties going to the lower start index.
    The output is oriented so that ``max g > 0``.

    Raises
    ------
    ValueError
        If ``Gamma = 0`` or ``A² + Gamma < 0``.
    """
    opts = opts or SolverOptions()
    _require_admissible(red)
    best, runs = _run_starts(red.A, red.Gamma, red.p, red.q, grid, opts)
    run = runs[best]
    g, f = run.g, run.f
    if -np.min(g) > np.max(g):
        g, f = -g, -f
    pair = rescale_to_solution(g, run.m, grid, red, f_unit=f)
    _, _, norms = system_residual(pair)
    return VariationalResult(
        pair=pair,
        m=run.m,
        mu=run.m,
        iterations=run.iterations,
        converged=run.converged,
        residual_norms=norms,
        start_index=best,
        objective_history=run.history,
        start_values=[(r.m, r.converged) for r in runs],
    )


def dual_reduced(params: SystemParams) -> ReducedParams:
    """Reduced constants of the dual problem (``A -> -A``, ``p <-> q``)."""
    return derive_reduced(SystemParams(params.n, params.b, params.a, params.q, params.p))


def duality_exponents(red: ReducedParams) -> tuple[float, float]:
    """``((q - p')/q, (p - q')/p)``: powers making the two minima comparable."""
    return (red.q - red.p_conj) / red.q, (red.p - red.q_conj) / red.p


def duality_check(params: SystemParams, grid: LineGrid, opts: SolverOptions | None = None):
    """Compare the primal and dual minima.

    Returns ``(m, m_tilde, defect)`` with
    ``defect = |m_tilde^{(q-p')/q} - m^{(p-q')/p}| / m^{(p-q')/p}``.

    Raises
    ------
    NonConvergenceError
        If either minimization fails to converge.
    """
    red = derive_reduced(params)
    primal = minimize_quotient(red, grid, opts)
    dual = minimize_quotient(dual_reduced(params), grid, opts)
    if not (primal.converged and dual.converged):
        raise NonConvergenceError("duality check: a minimization did not converge")
    e_dual, e_primal = duality_exponents(red)
    lhs = dual.m**e_dual
    rhs = primal.m**e_primal
    return primal.m, dual.m, abs(lhs - rhs) / rhs


def _derivative_of_signed_power(t: np.ndarray, r: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        out = (r - 1.0) * np.abs(t) ** (r - 2.0)
    return np.where(np.isfinite(out), out, 0.0)


def _probe_once(red: ReducedParams, grid: LineGrid, g0: np.ndarray, opts: SolverOptions) -> ProbeRun:
    h, p, q = grid.h, red.p, red.q
    solve_plus = _MarchingInverse(grid.nodes, h, red.A, red.Gamma)
    solve_minus = _MarchingInverse(grid.nodes, h, -red.A, red.Gamma)

    def evaluate(g):
        f_raw = solve_minus.solve(signed_power(g, q))
        f = np.maximum(f_raw, 0.0)
        rho = g - solve_plus.solve(signed_power(f, p))
        return 0.5 * h * float(rho @ rho), rho, f, f_raw

    g = np.maximum(np.asarray(g0, dtype=float), 0.0)
    value, rho, f, f_raw = evaluate(g)
    best = value
    history = [(0, float(np.max(g)), float(np.max(f)), value)]
    step = opts.probe_max_step
    k = 0
    for k in range(1, opts.probe_max_iter + 1):
        if np.max(g) < opts.trivial_tol or value == 0.0:
            break
        weight = solve_plus.solve_adjoint(rho) * _derivative_of_signed_power(f, p) * (f_raw > 0)
        grad = rho - _derivative_of_signed_power(g, q) * solve_minus.solve_adjoint(weight)
        while True:
            g_new = np.maximum(g - step * grad, 0.0)
            v_new, rho_new, f_new, fr_new = evaluate(g_new)
            if v_new <= value or step < opts.min_step:
                break
            step *= 0.5
        if step < opts.min_step:
            break
        g, value, rho, f, f_raw = g_new, v_new, rho_new, f_new, fr_new
        best = min(best, value)
        history.append((k, float(np.max(g)), float(np.max(f)), value))
        step = min(2.0 * step, opts.probe_max_step)
    g_sup = float(np.max(g))
    return ProbeRun(
        g_sup=g_sup,
        f_sup=float(np.max(f)),
        best_residual=best,
        iterations=k,
        collapsed=g_sup < opts.trivial_tol,
        history=history,
    )


def nonneg_probe(
    red: ReducedParams,
    grid: LineGrid,
    opts: SolverOptions | None = None,
    starts: list[np.ndarray] | None = None,
) -> ProbeReport:
    """Search for a nonnegative decaying solution when ``Gamma <= 0``.

    Minimizes the fixed-point residual ``g - L+^{-1} |f|^{p-2} f`` with
    ``f = max(L-^{-1} |g|^{q-2} g, 0)`` over ``g >= 0`` by projected descent.
    Collapse to zero is a numerical witness consistent with nonexistence, not
    a proof.

    Raises
    ------
    ValueError
        If ``Gamma > 0``, where sign-definite solutions are known to exist.
    """
    if red.Gamma > 0:
        raise ValueError("probe: Gamma > 0, positive solutions exist and the probe is meaningless")
    opts = opts or SolverOptions()
    if starts is None:
        starts = _start_profiles(grid, opts.multistarts, opts.seed)
    runs = [_probe_once(red, grid, g0, opts) for g0 in starts]
    if all(r.collapsed for r in runs):
        return ProbeReport("collapse", 0.0, runs)
    floor = min(r.best_residual for r in runs if not r.collapsed)
    return ProbeReport("residual-floor", floor, runs)


def with_options(opts: SolverOptions, **changes) -> SolverOptions:
    return dataclasses.replace(opts, **changes)
