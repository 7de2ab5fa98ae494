"""Fixed-step integration of the first-order Hamiltonian form of the reduced system.

In canonical coordinates ``X = (g, f)``, ``Y = (f' + A f, g' - A g)`` the
reduced system reads ``X' = dH/dY``, ``Y' = -dH/dX``. The flow is an
independent oracle: it conserves ``H`` and reproduces variational solutions
from a single handoff state.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .operators import (
    HamiltonianState,
    TrajectoryPair,
    first_derivative,
    hamiltonian,
)
from .params import ReducedParams


@dataclass(frozen=True)
class FlowOptions:
    """Integrator settings.

    Attributes
    ----------
    dt : float
        Fixed time step of the classical fourth-order Runge-Kutta scheme.
    blowup_cap : float
        Integration stops once any coordinate exceeds this magnitude.
    compensated : bool
        Accumulate the state with Kahan summation so that long runs show the
        truncation error of the scheme rather than round-off.
    """

    dt: float = 1e-3
    blowup_cap: float = 1e8
    compensated: bool = True


@dataclass
class FlowTrajectory:
    """Sampled flow: ``states[k] = (x1, x2, y1, y2)`` at ``times[k]``."""

    times: np.ndarray
    states: np.ndarray
    H_values: np.ndarray
    red: ReducedParams
    blew_up: bool = False

    @property
    def drift(self) -> float:
        return float(np.max(np.abs(self.H_values - self.H_values[0])))


def _vector_field(red: ReducedParams):
    A, Gamma, p, q = red.A, red.Gamma, red.p, red.q
    coupling = A * A + Gamma

    def power(t: float, r: float) -> float:
        return abs(t) ** (r - 1.0) * (1.0 if t > 0 else -1.0 if t < 0 else 0.0)

    def rhs(x1, x2, y1, y2):
        return (
            y2 + A * x1,
            y1 - A * x2,
            -(A * y1 - coupling * x2 + power(x1, q)),
            -(-A * y2 - coupling * x1 + power(x2, p)),
        )

    return rhs


def integrate(start: HamiltonianState, t_span: tuple, opts: FlowOptions | None = None) -> FlowTrajectory:
    """Integrate from ``start`` over ``t_span = (t0, t1)`` with ``t1 > t0``.

    The last step is shortened so that ``t1`` is hit exactly. Integration
    stops early, with ``blew_up`` set, when a coordinate exceeds
    ``opts.blowup_cap``.
    """
    opts = opts or FlowOptions()
    t0, t1 = map(float, t_span)
    if not t1 > t0:
        raise ValueError("t_span must satisfy t1 > t0")
    z = [float(v) for v in start.as_vector()]
    if not all(np.isfinite(z)):
        raise ValueError("start state must be finite")
    rhs = _vector_field(start.red)
    steps = int(np.ceil((t1 - t0) / opts.dt - 1e-9))
    times = [t0]
    states = [tuple(z)]
    carry = [0.0, 0.0, 0.0, 0.0]
    blew_up = False
    for k in range(steps):
        dt = min(opts.dt, t1 - times[-1]) if k == steps - 1 else opts.dt
        k1 = rhs(*z)
        k2 = rhs(*(z[i] + 0.5 * dt * k1[i] for i in range(4)))
        k3 = rhs(*(z[i] + 0.5 * dt * k2[i] for i in range(4)))
        k4 = rhs(*(z[i] + dt * k3[i] for i in range(4)))
        for i in range(4):
            inc = dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if opts.compensated:
                y = inc - carry[i]
                t = z[i] + y
                carry[i] = (t - z[i]) - y
                z[i] = t
            else:
                z[i] += inc
        times.append(t1 if k == steps - 1 else t0 + (k + 1) * opts.dt)
        states.append(tuple(z))
        if not all(abs(v) <= opts.blowup_cap for v in z):
            blew_up = True
            break
    states = np.array(states)
    H = hamiltonian(HamiltonianState((states[:, 0], states[:, 1]), (states[:, 2], states[:, 3]), start.red))
    return FlowTrajectory(np.array(times), states, np.atleast_1d(H), start.red, blew_up)


def integrate_backward(start: HamiltonianState, duration: float, opts: FlowOptions | None = None) -> FlowTrajectory:
    """Integrate from ``start`` backward in time over ``duration``.

    Uses the reversal symmetry: ``(X, Y)(-t)`` under coefficient ``A`` equals
    ``(X, -Y)(t)`` under ``-A``. Returned times run from ``0`` to
    ``duration`` and stand for ``-t``; states are mapped back to the original
    coordinates.
    """
    mirrored_red = dataclasses.replace(start.red, A=-start.red.A)
    mirrored = HamiltonianState(start.X, (-start.Y[0], -start.Y[1]), mirrored_red)
    traj = integrate(mirrored, (0.0, duration), opts)
    states = traj.states.copy()
    states[:, 2:] *= -1.0
    return FlowTrajectory(traj.times, states, traj.H_values, start.red, traj.blew_up)


@dataclass(frozen=True)
class CrossCheckOptions:
    """Settings of :func:`cross_check`.

    ``horizon`` defaults to ``0.8 L``; it is always capped there. The
    integrator step is ``h / round(h / dt)`` so that samples land on nodes.
    ``perturb`` multiplies the ``g`` coordinate of the handoff state and is
    used as a negative control.
    """

    dt: float = 1e-3
    horizon: float | None = None
    perturb: float = 1.0
    blowup_cap: float = 1e8
    floor: float = 1e-6


@dataclass
class CrossCheckReport:
    deviation: float
    window: tuple
    blew_up: bool
    blowup_time: float | None
    handoff_index: int


def cross_check(source, opts: CrossCheckOptions | None = None) -> CrossCheckReport:
    """Integrate from one node of a grid solution and compare with the grid values.

    Parameters
    ----------
    source : VariationalResult or TrajectoryPair
        The grid solution; the handoff node is the one nearest ``argmax |g|``.
    opts : CrossCheckOptions

    Returns
    -------
    CrossCheckReport
        Sup deviation of ``(g, f)`` over nodes within the horizon where
        ``max(|g|, |f|)`` exceeds ``opts.floor``. Blow-up is reported and
        truncates the scored window.

    Raises
    ------
    ValueError
        If ``source`` is a variational result that did not converge.
    """
    opts = opts or CrossCheckOptions()
    if getattr(source, "converged", True) is False:
        raise ValueError("cross_check needs a converged solution")
    pair: TrajectoryPair = getattr(source, "pair", source)
    grid, red, g, f = pair.grid, pair.red, pair.g, pair.f
    i0 = int(np.argmax(np.abs(g)))
    if np.max(np.abs(g)) == 0.0 and np.max(np.abs(f)) == 0.0:
        return CrossCheckReport(0.0, (0.0, 0.0), False, None, i0)
    h = grid.h
    substeps = max(1, int(round(h / opts.dt)))
    flow_opts = FlowOptions(dt=h / substeps, blowup_cap=opts.blowup_cap)
    horizon = 0.8 * grid.L if opts.horizon is None else min(opts.horizon, 0.8 * grid.L)
    gp = first_derivative(g, h)[i0]
    fp = first_derivative(f, h)[i0]
    x1, x2 = g[i0] * opts.perturb, f[i0]
    start = HamiltonianState((x1, x2), (fp + red.A * x2, gp - red.A * x1), red)
    deviation = 0.0
    blowup_time = None
    window = [0.0, 0.0]
    for direction in (1, -1):
        room = (grid.nodes - 1 - i0) if direction > 0 else i0
        nsteps = min(int(np.floor(horizon / h + 1e-9)), room)
        if nsteps == 0:
            continue
        duration = nsteps * h
        if direction > 0:
            traj = integrate(start, (0.0, duration), flow_opts)
        else:
            traj = integrate_backward(start, duration, flow_opts)
        sampled = traj.states[::substeps]
        count = len(sampled)
        if traj.blew_up:
            t_hit = float(traj.times[-1])
            blowup_time = t_hit if blowup_time is None else min(blowup_time, t_hit)
            count = min(count, int(np.floor(t_hit / h)))
        idx = i0 + direction * np.arange(count)
        mask = np.maximum(np.abs(g[idx]), np.abs(f[idx])) > opts.floor
        if np.any(mask):
            dev = max(
                np.max(np.abs(sampled[:count, 0][mask] - g[idx][mask])),
                np.max(np.abs(sampled[:count, 1][mask] - f[idx][mask])),
            )
            deviation = max(deviation, float(dev))
        reach = (count - 1) * h
        window[0 if direction < 0 else 1] = -reach if direction < 0 else reach
    return CrossCheckReport(deviation, tuple(window), blowup_time is not None, blowup_time, i0)
