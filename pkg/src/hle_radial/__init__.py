"""Radial solutions of the Hénon-Lane-Emden system on the critical hyperbola."""

from .params import (
    ParameterError,
    Regime,
    RegimeTag,
    ReducedParams,
    SystemParams,
    apriori_bounds,
    check_hyperbola,
    classify_regime,
    derive_reduced,
    equilibria,
)
from .operators import HamiltonianState, LineGrid, TrajectoryPair
from .variational import SolverOptions, VariationalResult, minimize_quotient

__all__ = [
    "ParameterError",
    "Regime",
    "RegimeTag",
    "ReducedParams",
    "SystemParams",
    "apriori_bounds",
    "check_hyperbola",
    "classify_regime",
    "derive_reduced",
    "equilibria",
    "HamiltonianState",
    "LineGrid",
    "TrajectoryPair",
    "SolverOptions",
    "VariationalResult",
    "minimize_quotient",
]

__version__ = "0.1.0"
