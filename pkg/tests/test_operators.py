from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import exact_soliton_pair, solve_cached, P2_CASE
from hle_radial.operators import (
    HamiltonianState,
    LineGrid,
    TrajectoryPair,
    apply_Lminus,
    apply_Lplus,
    energy,
    fourth_order_residual,
    hamiltonian,
    lplus_matrix,
    signed_power,
    state_from_pair,
    system_residual,
)
from hle_radial.params import SystemParams, derive_reduced


def test_grid_layout():
    grid = LineGrid(15, 0.01)
    assert grid.nodes == 3001 and grid.nodes % 2 == 1
    s = grid.s
    assert s[0] == -15 and s[-1] == 15 and s[grid.center] == 0
    assert np.allclose(s, -s[::-1], atol=0, rtol=0)


def test_grid_effective_spacing_and_floor():
    grid = LineGrid(1.0, 0.03)
    assert grid.nodes == 2 * 33 + 1
    assert grid.h == pytest.approx(1 / 33)
    with pytest.raises(ValueError):
        LineGrid(10, 0.2)
    with pytest.raises(ValueError):
        LineGrid(-1, 0.01)


def test_grid_from_nodes():
    grid = LineGrid(12, 0.05)
    assert LineGrid.from_nodes(grid.s).nodes == grid.nodes
    bad = grid.s.copy()
    bad[3] += 1e-3
    with pytest.raises(ValueError):
        LineGrid.from_nodes(bad)


def test_signed_power_conventions():
    t = np.array([-8.0, -1.0, 0.0, 1.0, 8.0])
    assert np.array_equal(signed_power(t, 1.5), np.array([-8**0.5, -1, 0, 1, 8**0.5]))
    assert np.array_equal(signed_power(t, 4), t**3)
    assert signed_power(np.array([0.0]), 1.2)[0] == 0.0


def test_lplus_zero_and_linearity(soliton_red):
    grid = LineGrid(5, 0.05)
    red = replace(soliton_red, A=0.7, Gamma=0.3)
    rng = np.random.default_rng(1)
    g1, g2 = rng.normal(size=(2, grid.nodes))
    assert np.all(apply_Lplus(np.zeros(grid.nodes), grid, red) == 0)
    lhs = apply_Lplus(2.5 * g1 - 0.5 * g2, grid, red)
    rhs = 2.5 * apply_Lplus(g1, grid, red) - 0.5 * apply_Lplus(g2, grid, red)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(lhs))


def test_lplus_soliton_converges_at_order_two():
    errors = []
    for h in (0.02, 0.01):
        t = exact_soliton_pair(15, h)
        window = np.abs(t.grid.s) <= 10
        err = apply_Lplus(t.g, t.grid, t.red) - t.g**3
        errors.append(np.max(np.abs(err[window])))
    assert errors[0] / errors[1] == pytest.approx(4.0, abs=0.2)
    assert errors[1] / 0.01**2 < 1.0


def test_lminus_examples(soliton_red):
    grid = LineGrid(4, 0.05)
    rng = np.random.default_rng(2)
    x = rng.normal(size=grid.nodes)
    assert np.array_equal(apply_Lminus(x, grid, soliton_red), apply_Lplus(x, grid, soliton_red))
    assert np.all(apply_Lminus(np.zeros(grid.nodes), grid, soliton_red) == 0)
    red = replace(soliton_red, A=1.0, Gamma=0.0)
    out = apply_Lminus(grid.s, grid, red)
    assert np.allclose(out[1:-1], -2.0, atol=1e-10)


def test_matrix_matches_stencils_and_transposes(soliton_red):
    grid = LineGrid(3, 0.05)
    red = replace(soliton_red, A=-0.4, Gamma=1.3)
    mat = lplus_matrix(grid.nodes, grid.h, red.A, red.Gamma)
    x = np.random.default_rng(3).normal(size=grid.nodes)
    assert np.allclose(mat @ x, apply_Lplus(x, grid, red), rtol=0, atol=1e-9)
    assert np.allclose(mat.T @ x, apply_Lminus(x, grid, red), rtol=0, atol=1e-9)


def test_energy_examples(soliton_red):
    grid = LineGrid(5, 0.05)
    zero = TrajectoryPair(grid, np.zeros(grid.nodes), np.zeros(grid.nodes), soliton_red)
    assert np.all(energy(zero) == 0)
    ones = TrajectoryPair(grid, np.ones(grid.nodes), np.ones(grid.nodes), soliton_red)
    assert np.allclose(energy(ones)[1:-1], -0.5, rtol=0, atol=1e-15)


def test_soliton_null_energy_order_two():
    sups = [np.max(np.abs(energy(exact_soliton_pair(15, h)))) for h in (0.02, 0.01)]
    assert sups[1] < 1e-4
    assert sups[0] / sups[1] == pytest.approx(4.0, abs=0.3)


def test_hamiltonian_examples(soliton_red):
    assert hamiltonian(HamiltonianState((0.0, 0.0), (0.0, 0.0), soliton_red)) == 0.0
    assert hamiltonian(HamiltonianState((1.0, 1.0), (0.0, 0.0), soliton_red)) == pytest.approx(-0.5, abs=1e-16)


@settings(max_examples=60, deadline=None)
@given(
    arrays(np.float64, 41, elements=st.floats(-3, 3)),
    arrays(np.float64, 41, elements=st.floats(-3, 3)),
    st.floats(-2, 2),
    st.floats(-2, 2),
    st.floats(1.1, 6),
    st.floats(1.1, 6),
)
def test_hamiltonian_equals_energy(g, f, A, Gamma, p, q):
    grid = LineGrid(2.0, 0.1)
    red = replace(derive_reduced(SystemParams(4, 0, 0, 4, 4)), A=A, Gamma=Gamma, p=p, q=q)
    pair = TrajectoryPair(grid, g, f, red)
    E = energy(pair)
    H = hamiltonian(state_from_pair(pair))
    scale = max(1.0, float(np.max(np.abs(E))))
    assert np.max(np.abs(H - E)) <= 1e-12 * scale * 100


def test_system_residual_examples():
    for tup in [(4, 0, 0, 4, 4), (3, -4, 3, 2, 4), (3, 0, 0, 4, 12)]:
        red = derive_reduced(SystemParams(*tup))
        grid = LineGrid(3, 0.05)
        zero = TrajectoryPair(grid, np.zeros(grid.nodes), np.zeros(grid.nodes), red)
        assert system_residual(zero)[2] == (0.0, 0.0)
        from hle_radial.params import equilibria

        for c1, c2 in equilibria(red):
            pair = TrajectoryPair(grid, np.full(grid.nodes, c1), np.full(grid.nodes, c2), red)
            assert max(system_residual(pair)[2]) < 1e-12


def test_soliton_residual_order_two():
    norms = [max(system_residual(exact_soliton_pair(15, h))[2]) for h in (0.02, 0.01)]
    assert 3.5 <= norms[0] / norms[1] <= 4.5


def test_energy_spread_bounded_by_residual():
    # exact soliton: residual O(h^2) and tails ~ 4e-7, so the spread must be of that order
    pair = exact_soliton_pair(15, 0.01)
    eps = max(system_residual(pair)[2])
    E = energy(pair)
    assert np.ptp(E) <= 10 * (eps + 0.01**2)


def _p2_red(**changes):
    return replace(derive_reduced(SystemParams(*P2_CASE)), **changes)


def test_fourth_order_examples():
    red = _p2_red()
    grid = LineGrid(3, 0.05)
    assert np.all(fourth_order_residual(np.zeros(grid.nodes), grid, red) == 0)
    ones_red = _p2_red(Gamma=1.0)
    res = fourth_order_residual(np.ones(grid.nodes), grid, ones_red)
    assert np.max(np.abs(res[2:-2])) < 1e-12
    with pytest.raises(ValueError):
        fourth_order_residual(np.zeros(grid.nodes), grid, derive_reduced(SystemParams(4, 0, 0, 4, 4)))


def test_fourth_order_matches_polynomial_derivatives():
    red = _p2_red()
    poly = np.polynomial.Polynomial([0.3, -1.0, 0.5, 0.2, -0.4, 0.1, 0.05])
    coefficient = 2 * (2 * red.A**2 + red.Gamma)
    errors = []
    for h in (0.1, 0.05):
        grid = LineGrid(1.0, h)
        s = grid.s
        g = poly(s)
        exact = poly.deriv(4)(s) - coefficient * poly.deriv(2)(s) + red.Gamma**2 * g - np.abs(g) ** 2 * g
        err = np.abs(fourth_order_residual(g, grid, red) - exact)[2:-2]
        errors.append(np.max(err))
    assert errors[1] <= 10 * 0.05**2
    assert 3.5 <= errors[0] / errors[1] <= 4.5


def test_fourth_order_vanishes_on_p2_solution():
    result = solve_cached(P2_CASE)
    pair = result.pair
    res = fourth_order_residual(pair.g, pair.grid, pair.red)
    assert np.max(np.abs(res[2:-2])) < 1e-4
