"""Acceptance suite: one PASS/FAIL line per criterion, printed uncaptured."""

import time

import numpy as np
import pytest

from conftest import ASYMMETRIC, MIXED_A, MIXED_B, P2_CASE, SOLITON, SUBQUADRATIC, solve_cached, soliton_profile
from hle_radial.flow import FlowOptions, integrate
from hle_radial.operators import (
    HamiltonianState,
    LineGrid,
    TrajectoryPair,
    energy_terms,
    fourth_order_residual,
    system_residual,
)
from hle_radial.params import SystemParams, apriori_bounds, derive_reduced, equilibria
from hle_radial.radial import p2_qualitative_check, pde_residual, peak_location, to_radial
from hle_radial.rellich import gamma_appendix, mu2, mu_theta, radial_isometry_check
from hle_radial.variational import SolverOptions, duality_check, minimize_quotient, nonneg_probe

POSITIVE_CONFIGS = [SOLITON, ASYMMETRIC, P2_CASE, SUBQUADRATIC, (5, 1, -1.0, 3, 4)]
# equilibria are saddles; float64 rounding of the fixed point grows like exp(10 lambda), so the
# 1e-10 hold is checked where that growth stays below it (the steep saddle is covered in the flow tests)
EQUILIBRIUM_CONFIGS = [SOLITON, ASYMMETRIC, P2_CASE, SUBQUADRATIC, MIXED_A, MIXED_B]


@pytest.fixture
def verdict(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {k}: {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail

    return emit


def test_criterion_1_soliton(verdict):
    red = derive_reduced(SystemParams(*SOLITON))
    start = time.perf_counter()
    result = minimize_quotient(red, LineGrid(15.0, 0.01))
    runtime = time.perf_counter() - start
    pair = result.pair
    shift = peak_location(pair.g, pair.grid)
    exact = soliton_profile(pair.grid.s - shift)
    error = max(np.max(np.abs(pair.g - exact)), np.max(np.abs(pair.f - exact)))
    target = (16 / 3) ** (2 / 3)
    rel = abs(result.m - target) / target
    ok = result.converged and error < 5e-3 and rel < 1e-2 and runtime < 60.0
    verdict(1, ok, f"sup error {error:.3e} < 5e-3, m {result.m:.6f} off by {rel:.2e} < 1e-2, runtime {runtime:.2f}s < 60s")


def test_criterion_2_instanton(verdict):
    pair = solve_cached(SOLITON, 15.0).pair
    sol = to_radial(pair, SystemParams(*SOLITON))
    exact = 2.0 * np.sqrt(2.0) / (1.0 + sol.radii**2)
    window = np.abs(pair.grid.s) <= 10.0 + 1e-12
    error = np.max(np.abs(sol.u - exact)[window] / exact[window])
    pde = max(pde_residual(sol)[2])
    ok = error < 1e-2 and pde < 1e-3
    verdict(2, ok, f"relative u error {error:.3e} < 1e-2, pde relative residual {pde:.3e} < 1e-3")


def test_criterion_3_conservation(verdict):
    red = derive_reduced(SystemParams(*SOLITON))
    start = HamiltonianState((np.sqrt(2.0), np.sqrt(2.0)), (0.0, 0.0), red)
    drift = integrate(start, (0.0, 20.0), FlowOptions(dt=1e-3)).drift
    half = integrate(start, (0.0, 20.0), FlowOptions(dt=5e-4)).drift
    ratio = drift / half
    worst = 0.0
    for tup in POSITIVE_CONFIGS:
        terms = energy_terms(solve_cached(tup).pair)
        largest = max(np.max(np.abs(t)) for t in terms)
        worst = max(worst, np.max(np.abs(sum(terms))) / largest)
    ok = drift < 1e-8 and 12.0 <= ratio <= 20.0 and worst < 1e-3
    verdict(3, ok, f"drift {drift:.3e} < 1e-8, halving ratio {ratio:.2f} in [12, 20], max|E|/term {worst:.3e} < 1e-3")


def test_criterion_4_sign(verdict):
    failures, checked = [], 0
    for tup in POSITIVE_CONFIGS:
        result = solve_cached(tup)
        pair = result.pair
        assert pair.red.Gamma > 0
        visible = np.maximum(np.abs(pair.g), np.abs(pair.f)) > 1e-6
        checked += int(np.count_nonzero(visible))
        if not (result.converged and np.all(pair.g[visible] * pair.f[visible] > 0)):
            failures.append(tup)
    verdict(4, not failures, f"g f > 0 on {checked} nodes over {len(POSITIVE_CONFIGS)} configurations, failures {failures}")


def test_criterion_5_bounds(verdict):
    worst = np.inf
    for tup in POSITIVE_CONFIGS + [MIXED_A, MIXED_B]:
        pair = solve_cached(tup).pair
        g_bound, f_bound = apriori_bounds(pair.red)
        worst = min(worst, g_bound - np.max(np.abs(pair.g)), f_bound - np.max(np.abs(pair.f)))
    g_bound, _ = apriori_bounds(derive_reduced(SystemParams(*SOLITON)))
    slack = g_bound - np.sqrt(2.0)
    ok = worst >= 0 and abs(g_bound - 3 ** (3 / 8)) < 1e-15 and slack >= 0.09
    verdict(5, ok, f"smallest slack {worst:.3e} >= 0, soliton bound {g_bound:.6f} - sqrt(2) = {slack:.4f} >= 0.09")


def test_criterion_6_probe(verdict):
    finals = []
    for tup in (MIXED_A, MIXED_B):
        red = derive_reduced(SystemParams(*tup))
        report = nonneg_probe(red, LineGrid(30.0, 0.01), SolverOptions(multistarts=5))
        assert len(report.runs) == 5
        finals.extend(run.g_sup for run in report.runs)
    worst = max(finals)
    verdict(6, worst < 1e-6, f"largest final sup of g {worst:.3e} < 1e-6 over {len(finals)} probe runs")


def test_criterion_7_rellich(verdict):
    first = mu2(5, 0.0)[0]
    second = mu2(4, 6.0)[0]
    worst, points = 0.0, 0
    for n in range(2, 11):
        for alpha in np.linspace(-n + 4.0, n, 9):
            if gamma_appendix(n, 2.0, alpha) >= 0:
                worst = max(worst, abs(mu_theta(n, 2.0, alpha) - mu2(n, alpha)[0]))
                points += 1
    ok = first == 25 / 16 and second == 0.0 and worst <= 1e-14
    verdict(7, ok, f"mu2(5,0) = {first!r}, mu2(4,6) = {second!r}, max gap {worst:.1e} over {points} points")


def test_criterion_8_duality(verdict):
    params = SystemParams(*ASYMMETRIC)
    defects = [duality_check(params, LineGrid(30.0, h))[2] for h in (0.02, 0.01, 0.005)]
    ok = defects[1] < 1e-2 and defects[0] > defects[1] > defects[2]
    verdict(8, ok, "defects " + ", ".join(f"{d:.2e}" for d in defects) + " at h = 0.02, 0.01, 0.005")


def test_criterion_9_equilibria(verdict):
    worst_residual, worst_motion = 0.0, 0.0
    grid = LineGrid(5.0, 0.01)
    for tup in EQUILIBRIUM_CONFIGS:
        red = derive_reduced(SystemParams(*tup))
        for c1, c2 in equilibria(red):
            pair = TrajectoryPair(grid, np.full(grid.nodes, c1), np.full(grid.nodes, c2), red)
            worst_residual = max(worst_residual, *system_residual(pair)[2])
            start = HamiltonianState((c1, c2), (red.A * c2, -red.A * c1), red)
            traj = integrate(start, (0.0, 10.0))
            worst_motion = max(worst_motion, np.max(np.abs(traj.states - start.as_vector())))
    ok = worst_residual < 1e-12 and worst_motion <= 1e-10
    verdict(9, ok, f"system residual {worst_residual:.2e} < 1e-12, flow motion {worst_motion:.2e} <= 1e-10")


def test_criterion_10_p2(verdict):
    pair = solve_cached(P2_CASE, multistarts=5).pair
    report = p2_qualitative_check(pair)
    norm = np.max(np.abs(pair.g))
    red = derive_reduced(SystemParams(*P2_CASE))
    steps = (0.04, 0.02, 0.01)
    sups = []
    for h in steps:
        grid = LineGrid(30.0, h)
        g = minimize_quotient(red, grid).pair.g
        sups.append(np.max(np.abs(fourth_order_residual(g, grid, red)[2:-2])))
    constant = max(s / h**2 for s, h in zip(sups, steps))
    ratios = [sups[0] / sups[1], sups[1] / sups[2]]
    ok = (
        report.evenness_defect < 1e-3 * norm
        and report.positive
        and report.monotone
        and report.f_sign_ok
        and constant <= 0.05
        and all(3.5 <= r <= 4.5 for r in ratios)
    )
    verdict(
        10,
        ok,
        f"evenness {report.evenness_defect:.2e} < {1e-3 * norm:.2e}, positive {report.positive}, "
        f"monotone {report.monotone}, f > 0 {report.f_sign_ok}, fourth-order C {constant:.3f} <= 0.05, "
        f"ratios {ratios[0]:.2f} {ratios[1]:.2f}",
    )


def test_criterion_11_isometry(verdict):
    profiles = {
        "instanton": lambda r: 2.0 * np.sqrt(2.0) / (1.0 + r**2),
        "gaussian": lambda r: np.exp(-np.log(r) ** 2 / 2.0),
    }
    parts, ok = [], True
    for name, profile in profiles.items():
        defects = []
        for h in (0.02, 0.01):
            grid = LineGrid(20.0, h)
            defects.append(radial_isometry_check(profile(np.exp(-grid.s)), grid, 4, 2.0, 0.0)[2])
        ratio = defects[0] / defects[1]
        ok = ok and defects[1] <= 1e-4 and 3.5 <= ratio <= 4.5
        parts.append(f"{name} defect {defects[1]:.2e} <= 1e-4 ratio {ratio:.2f}")
    verdict(11, ok, ", ".join(parts))
