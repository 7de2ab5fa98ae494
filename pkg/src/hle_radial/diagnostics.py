"""Verification fields shared by the solve and verify commands.

Every field is a deterministic function of the sampled pair, so re-reading a
written trajectory reproduces the report.
"""

from __future__ import annotations

import numpy as np

from .operators import TrajectoryPair, energy_terms, system_residual
from .params import SystemParams, apriori_bounds
from .radial import NOISE_FLOOR, decay_limits, pde_residual, to_radial

SCHEMA_VERSION = 1


def energy_report(pair: TrajectoryPair) -> dict:
    """Spread and size of the energy relative to its largest term."""
    terms = energy_terms(pair)
    E = sum(terms)
    largest = max(float(np.max(np.abs(term))) for term in terms)
    max_abs = float(np.max(np.abs(E)))
    return {
        "max_minus_min": float(np.max(E) - np.min(E)),
        "max_abs": max_abs,
        "largest_term": largest,
        "relative_max_abs": max_abs / largest if largest > 0 else 0.0,
    }


def sign_report(pair: TrajectoryPair, floor: float = NOISE_FLOOR) -> dict:
    """Sign of ``g f`` at nodes where ``max(|g|, |f|) > floor``."""
    product = pair.g * pair.f
    visible = np.maximum(np.abs(pair.g), np.abs(pair.f)) > floor
    checked = int(np.count_nonzero(visible))
    positive = int(np.count_nonzero(product[visible] > 0))
    return {
        "floor": floor,
        "checked_nodes": checked,
        "positive_nodes": positive,
        "all_positive": checked > 0 and positive == checked,
        "min_product": float(np.min(product[visible])) if checked else 0.0,
        "max_product": float(np.max(product[visible])) if checked else 0.0,
    }


def bound_report(pair: TrajectoryPair) -> dict:
    """Sup-norms against the a-priori bounds."""
    g_bound, f_bound = apriori_bounds(pair.red)
    g_sup = float(np.max(np.abs(pair.g)))
    f_sup = float(np.max(np.abs(pair.f)))
    return {
        "g_sup": g_sup,
        "f_sup": f_sup,
        "g_bound": g_bound,
        "f_bound": f_bound,
        "g_slack": g_bound - g_sup,
        "f_slack": f_bound - f_sup,
        "ok": g_sup <= g_bound and f_sup <= f_bound,
    }


def decay_report(pair: TrajectoryPair) -> dict | None:
    if pair.grid.L < 10:
        return None
    rep = decay_limits(pair)
    return {
        "lim_u_inf": rep.lim_u_inf,
        "lim_u_0": rep.lim_u_0,
        "lim_v_inf": rep.lim_v_inf,
        "lim_v_0": rep.lim_v_0,
        "window": rep.window,
        "limit_exists": dict(sorted(rep.limit_exists.items())),
        "tail_mean": dict(sorted(rep.tail_mean.items())),
    }


def verification_fields(pair: TrajectoryPair, params: SystemParams) -> dict:
    """All verifier outputs for a sampled pair."""
    _, _, norms = system_residual(pair)
    _, _, pde_norms = pde_residual(to_radial(pair, params))
    return {
        "residual_norms": list(norms),
        "pde_residual_norms": list(pde_norms),
        "energy_drift": energy_report(pair),
        "sign_report": sign_report(pair),
        "bound_check": bound_report(pair),
        "decay_report": decay_report(pair),
    }


def compare_fields(a, b, tol: float = 1e-12, path: str = "") -> list[str]:
    """Paths where two nested reports differ beyond ``tol`` (relative to ``max(1, |x|)``)."""
    diffs = []
    if isinstance(a, dict) and isinstance(b, dict):
        for key in sorted(set(a) | set(b)):
            if key not in a or key not in b:
                diffs.append(f"{path}/{key}")
            else:
                diffs.extend(compare_fields(a[key], b[key], tol, f"{path}/{key}"))
    elif isinstance(a, list) and isinstance(b, list):
        if len(a) != len(b):
            diffs.append(path)
        for i, (x, y) in enumerate(zip(a, b)):
            diffs.extend(compare_fields(x, y, tol, f"{path}/{i}"))
    elif isinstance(a, bool) or isinstance(b, bool) or a is None or b is None or isinstance(a, str):
        if a != b:
            diffs.append(path)
    elif abs(float(a) - float(b)) > tol * max(1.0, abs(float(a))):
        diffs.append(path)
    return diffs
