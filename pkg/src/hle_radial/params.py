"""Parameter validation and reduced constants for the radial Hénon-Lane-Emden system.

The radial system

    -Δu = |x|^a |v|^{p-2} v,    -Δv = |x|^b |u|^{q-2} u    in R^n

is reduced on the critical hyperbola by the Emden-Fowler change of variables
to a pair of ODEs on the line driven by two constants ``A`` and ``Gamma``.
This module validates the PDE data, derives those constants, and evaluates the
closed-form quantities that depend on them alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

HYPERBOLA_RTOL = 1e-12


class ParameterError(ValueError):
    """Raised when PDE data violate a required relation.

    The message names the relation (for example ``hyperbola``) so that
    callers and the command line can report it verbatim.
    """


@dataclass(frozen=True)
class SystemParams:
    """PDE data ``(n, a, b, p, q)``.

    Only the elementary ranges (``n >= 2``, ``p > 1``, ``q > 1``) are enforced
    on construction. The hyperbola and anticoercivity relations are checked by
    :func:`derive_reduced`, so off-hyperbola data can still be represented and
    tested with :func:`check_hyperbola`.
    """

    n: int
    a: float
    b: float
    p: float
    q: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ParameterError(f"dimension: n must be an integer >= 2, got {self.n}")
        if not all(math.isfinite(x) for x in (self.a, self.b, self.p, self.q)):
            raise ParameterError("finiteness: a, b, p, q must be finite")
        if self.p <= 1 or self.q <= 1:
            raise ParameterError(f"exponents: p > 1 and q > 1 required, got p={self.p}, q={self.q}")
        object.__setattr__(self, "n", int(self.n))

    def as_tuple(self):
        return (self.n, self.a, self.b, self.p, self.q)


@dataclass(frozen=True)
class ReducedParams:
    """Constants of the reduced line problem.

    Attributes
    ----------
    lambda1, lambda2 : float
        ``(b+n)/q`` and ``(a+n)/p``; the decay exponents of ``u`` and ``v``.
    A : float
        First-order coefficient ``(n-2)/2 - lambda1``.
    Gamma : float
        Zeroth-order coefficient ``lambda1 * lambda2``.
    delta : float
        ``p q - (p + q)``, positive under anticoercivity.
    p_conj, q_conj : float
        Hölder conjugates of ``p`` and ``q``.
    """

    lambda1: float
    lambda2: float
    A: float
    Gamma: float
    delta: float
    p_conj: float
    q_conj: float
    p: float
    q: float
    n: int


class RegimeTag(str, Enum):
    POSITIVE_EXISTENCE = "PositiveExistence"
    NONEXISTENCE_NONNEG = "NonexistenceNonneg"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    reasons: tuple = field(default_factory=tuple)


def hyperbola_defect(params: SystemParams) -> float:
    """Signed defect ``(a+n)/p + (b+n)/q - (n-2)``."""
    n, a, b, p, q = params.as_tuple()
    return (a + n) / p + (b + n) / q - (n - 2)


def _hyperbola_scale(params: SystemParams) -> float:
    n, a, b, p, q = params.as_tuple()
    return max(1.0, abs((a + n) / p), abs((b + n) / q), abs(n - 2))


def check_hyperbola(params: SystemParams) -> bool:
    """True when the data lie on the critical hyperbola (relative tolerance 1e-12)."""
    return abs(hyperbola_defect(params)) <= HYPERBOLA_RTOL * _hyperbola_scale(params)


def anticoercive(params: SystemParams) -> bool:
    """True when ``1/p + 1/q < 1``."""
    return 1.0 / params.p + 1.0 / params.q < 1.0


def derive_reduced(params: SystemParams) -> ReducedParams:
    """Compute the reduced constants, validating the hyperbola and anticoercivity.

    Raises
    ------
    ParameterError
        If either relation fails; the message names it.
    """
    if not check_hyperbola(params):
        raise ParameterError(
            "hyperbola: (a+n)/p + (b+n)/q = n-2 violated, defect "
            f"{hyperbola_defect(params):.6g}"
        )
    if not anticoercive(params):
        raise ParameterError(
            f"anticoercivity: 1/p + 1/q < 1 violated, 1/p + 1/q = {1 / params.p + 1 / params.q:.6g}"
        )
    n, a, b, p, q = params.as_tuple()
    lambda1 = (b + n) / q
    lambda2 = (a + n) / p
    return ReducedParams(
        lambda1=lambda1,
        lambda2=lambda2,
        A=(n - 2) / 2 - lambda1,
        Gamma=lambda1 * lambda2,
        delta=p * q - (p + q),
        p_conj=p / (p - 1),
        q_conj=q / (q - 1),
        p=p,
        q=q,
        n=n,
    )


def _is_minus_n(x: float, n: int) -> bool:
    return abs(x + n) <= HYPERBOLA_RTOL * max(1.0, n)


def classify_regime(params: SystemParams) -> Regime:
    """Classify the data into the existence or nonexistence regime.

    ``PositiveExistence`` when ``a > -n`` and ``b > -n`` (then ``Gamma > 0``),
    ``Degenerate`` when ``a = -n`` or ``b = -n`` (then ``Gamma = 0``), and
    ``NonexistenceNonneg`` otherwise (then ``Gamma < 0``).
    """
    red = derive_reduced(params)
    n, a, b = params.n, params.a, params.b
    if _is_minus_n(a, n) or _is_minus_n(b, n):
        return Regime(
            RegimeTag.DEGENERATE,
            (
                "a = -n or b = -n gives Gamma = 0",
                "null-energy a-priori bound forces g = f = 0, so only the trivial solution decays",
                "variational existence requires Gamma != 0; solvers refuse this case",
            ),
        )
    if a > -n and b > -n:
        return Regime(
            RegimeTag.POSITIVE_EXISTENCE,
            (
                f"a > -n and b > -n give Gamma = {red.Gamma:.6g} > 0",
                "a nontrivial radial solution exists since Gamma != 0",
                "every decaying radial solution is trivial or satisfies uv > 0",
            ),
        )
    return Regime(
        RegimeTag.NONEXISTENCE_NONNEG,
        (
            f"exactly one of a, b lies below -n, giving Gamma = {red.Gamma:.6g} < 0",
            "a nontrivial radial solution exists since Gamma != 0, but it changes sign",
            "nonnegative radial solutions with finite limits of |x|^lambda1 u, |x|^lambda2 v are trivial",
            "caveat: the nonnegative nonexistence statement assumes those limits exist; "
            "this label does not verify that assumption",
        ),
    )


def _exp(x: float) -> float:
    # huge exponents arise as delta -> 0; report inf instead of raising
    return math.exp(x) if x < 709.0 else math.inf


def apriori_bounds(red: ReducedParams) -> tuple[float, float]:
    """Sup-norm bounds on null-energy trajectories.

    Returns ``(g_bound, f_bound)`` with
    ``g_bound = ((q/p')|Gamma|^{p'})^{1/(q-p')}`` and
    ``f_bound = ((p/q')|Gamma|^{q'})^{1/(p-q')}``; both vanish when ``Gamma = 0``.
    """
    if red.Gamma == 0.0:
        return 0.0, 0.0
    log_gamma = math.log(abs(red.Gamma))
    p, q, pc, qc = red.p, red.q, red.p_conj, red.q_conj
    g_bound = _exp((math.log(q / pc) + pc * log_gamma) / (q - pc))
    f_bound = _exp((math.log(p / qc) + qc * log_gamma) / (p - qc))
    return g_bound, f_bound


def equilibria(red: ReducedParams) -> list[tuple[float, float]]:
    """Constant solutions ``(c1, c2)`` of the reduced system.

    Returns the origin followed by ``+(c1, c2)`` and ``-(c1, c2)`` with
    ``c1 = |Gamma|^{p/delta}`` and ``c2 = |Gamma|^{q/delta - 1} Gamma``.
    Only the origin is returned when ``Gamma = 0``.
    """
    if red.Gamma == 0.0:
        return [(0.0, 0.0)]
    log_gamma = math.log(abs(red.Gamma))
    c1 = _exp(red.p / red.delta * log_gamma)
    c2 = _exp(red.q / red.delta * log_gamma) * math.copysign(1.0, red.Gamma)
    return [(0.0, 0.0), (c1, c2), (-c1, -c2)]


def hyperbola_b(n: int, a: float, p: float, q: float) -> float:
    """Solve the hyperbola relation for ``b`` given ``(n, a, p, q)``."""
    return q * ((n - 2) - (a + n) / p) - n
