import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from mdat.bands import table_for
from mdat.inverse import band_weights
from mdat.smoother import (BandSpan, SmoothingProblem, build_operators, constraint_residuals,
                           flow, objective, second_difference, smooth_weights,
                           smoothing_problem, tilde_c)


def random_problem(rng, table, tau):
    c = rng.uniform(0, 1, 128)
    theta = np.zeros(len(table))
    for band in table.ac_bands:
        psi = c[table.band_slice(band.index)]
        theta[band.index] = rng.uniform(psi.min(), psi.max())
    rho = band_weights(theta, np.ones(len(table), dtype=bool), c, table)
    return smoothing_problem(rho, c, theta, table, tau)


def test_second_difference():
    A = second_difference(4)
    np.testing.assert_array_equal(A, [[-1, 1, 0, 0], [1, -2, 1, 0], [0, 1, -2, 1], [0, 0, 1, -1]])
    u = np.array([0.0, 1.0, 3.0, 2.0])
    # -A u is the gradient of the roughness
    eps = 1e-6
    grad = [(objective(u + eps * d) - objective(u - eps * d)) / (2 * eps) for d in np.eye(4)]
    np.testing.assert_allclose(-A @ u, grad, atol=1e-8)


def test_tilde_c():
    ct = tilde_c(np.array([0.1, 0.2, 0.6]))
    assert ct.sum() == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(ct, 1 - np.array([0.1, 0.2, 0.6]) * 3 / 0.9)
    assert np.all(tilde_c(np.zeros(3)) == 0)
    assert np.all(tilde_c(np.full(4, 0.25)) == 0)


def test_region(table):
    problem = random_problem(np.random.default_rng(0), table, 1.0)
    assert problem.u0.size == sum(b.width for b in table.smoothing_bands)
    assert problem.layout[0].offset == 0
    assert problem.layout[-1].offset + problem.layout[-1].width == problem.u0.size


def test_projector(table, rng):
    for _ in range(100):
        operators = build_operators(random_problem(rng, table, 1.0))
        R = operators.R
        np.testing.assert_allclose(R @ R, R, atol=1e-10)
        np.testing.assert_allclose(R, R.T, atol=1e-14)


@pytest.mark.parametrize('tau', [0.5, 1.0, 2.0])
def test_constraints_preserved(table, rng, tau):
    for _ in range(100):
        problem = random_problem(rng, table, tau)
        g0, h0 = constraint_residuals(problem, problem.u0)
        assert np.max(np.abs(g0)) < 1e-10
        assert np.max(np.abs(h0)) < 1e-10
        g, h = constraint_residuals(problem, flow(problem))
        assert np.max(np.abs(g)) < 1e-7
        assert np.max(np.abs(h)) < 1e-7


def test_roughness_decreases(table, rng):
    for _ in range(20):
        problem = random_problem(rng, table, 0.0)
        operators = build_operators(problem)
        values = [objective(flow(problem._replace(tau=tau), operators))
                  for tau in np.linspace(0, 2, 11)]
        assert np.all(np.diff(values) <= 1e-12)
        assert values[-1] < values[0]


def test_matches_integration(table, rng):
    problem = random_problem(rng, table, 2.0)
    G = build_operators(problem).G
    oracle = solve_ivp(lambda t, u: G @ u, (0, 2.0), problem.u0, method='DOP853',
                       rtol=1e-11, atol=1e-13)
    np.testing.assert_allclose(flow(problem), oracle.y[:, -1], atol=1e-6)


def test_zero_time():
    problem = random_problem(np.random.default_rng(3), table_for(16000), 0.0)
    u = flow(problem)
    np.testing.assert_array_equal(u, problem.u0)
    assert u is not problem.u0


def test_negative_time():
    problem = random_problem(np.random.default_rng(3), table_for(16000), -1.0)
    with pytest.raises(ValueError):
        flow(problem)


def test_smooth_weights_leaves_narrow_bands(rng):
    table = table_for(16000)
    c = rng.uniform(0, 1, 128)
    theta = np.array([0.0] + [c[table.band_slice(b.index)].mean() for b in table.ac_bands])
    rho = band_weights(theta, np.ones(len(table), dtype=bool), c, table)
    smoothed = smooth_weights(rho, c, theta, table, 2.0)
    k0 = table.smoothing_bands[0].low
    np.testing.assert_array_equal(smoothed[:k0], rho[:k0])
    assert objective(smoothed[k0:]) < objective(rho[k0:])
    np.testing.assert_array_equal(smooth_weights(rho, c, theta, table, 0.0), rho)


def test_fixed_point_does_not_move(rng):
    layout = (BandSpan(1, 0, 3), BandSpan(2, 3, 4), BandSpan(3, 7, 5))
    psi = rng.uniform(0, 1, 12)
    problem = SmoothingProblem(np.full(12, 0.25), psi, np.array([0.5, 0.5, 0.5]), 2.0, layout)
    operators = build_operators(problem)
    np.testing.assert_allclose(operators.G @ problem.u0, 0.0, atol=1e-14)
    for tau in (0.5, 2.0, 10.0):
        np.testing.assert_allclose(flow(problem._replace(tau=tau), operators), problem.u0,
                                   atol=1e-10)


@pytest.mark.parametrize('constant', [0.0, 0.4])
def test_constant_band_drops_second_constraint(rng, constant):
    layout = (BandSpan(1, 0, 3), BandSpan(2, 3, 4))
    psi = np.concatenate([np.full(3, constant), rng.uniform(0, 1, 4)])
    u0 = rng.uniform(0, 1, 7)
    problem = SmoothingProblem(u0, psi, np.array([constant, 0.5]), 1.5, layout)

    R = np.zeros((7, 7))
    R[:3, :3] = 1.0 / 3
    ct = tilde_c(psi[3:])
    R[3:, 3:] = 1.0 / 4 + np.outer(ct, ct) / (ct @ ct)
    operators = build_operators(problem)
    np.testing.assert_allclose(operators.R, R, atol=1e-14)
    expected = expm((np.eye(7) - R) @ second_difference(7) * 1.5) @ u0
    np.testing.assert_allclose(flow(problem), expected, atol=1e-12)
