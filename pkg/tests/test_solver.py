import dataclasses

import numpy as np
import pytest

from irpnm.linop import DenseMap, SubsampledDCT
from irpnm.model import Problem, build_model
from irpnm.regularizer import L1, BoxIndicator, GroupL2, zero_regularizer
from irpnm.smooth import Quadratic, SmoothTerm, StudentT
from irpnm.solver import (DIRECTION_CONVERGED, RESIDUAL_CONVERGED, SolverConfig,
                          SolverError, line_search, pg_baseline, solve)

from conftest import ista, lasso_problem


def scalar_state(x, mu):
    prob = Problem(SmoothTerm(Quadratic(), DenseMap([[1.0]]), np.zeros(1)), zero_regularizer())
    state = build_model(prob, np.array([x]), a1=1.0, a2=1.0, rho=0.0)
    return prob, dataclasses.replace(state, mu=mu)


def robust_problem(rng, n=256, m=64, reg=None):
    A = SubsampledDCT(n, np.sort(rng.choice(n, m, replace=False)))
    x = np.zeros(n)
    x[rng.choice(n, 6, replace=False)] = 3 * rng.standard_normal(6)
    b = A.apply(x) + 0.1 * rng.standard_t(4, m)
    smooth = SmoothTerm(StudentT(0.25), A, b)
    lam = 0.1 * np.abs(smooth.grad(np.zeros(n))).max()
    return Problem(smooth, reg or L1(lam)), A.adjoint(b)


def test_config_validation():
    for bad in (dict(eps0=0), dict(a1=0.5), dict(a2=-1.0), dict(rho=1.0), dict(rho=0.5, tau=0.3),
                dict(eta=1.0), dict(beta=0.0), dict(sigma_ls=0.5), dict(max_outer=0)):
        with pytest.raises(ValueError):
            SolverConfig(**bad)
    cfg = SolverConfig()
    assert cfg.tau_value == cfg.rho == 0.45
    assert cfg.resolve_a2(0.5) == 1e-4
    assert cfg.resolve_a2(1e3) == 1e-5


def test_line_search_unit_step():
    prob, state = scalar_state(1.0, 1.0)
    y = np.array([0.2])
    m, alpha, x_next, F_next, chose_y = line_search(prob, state, y, y - state.x)
    assert (m, alpha, chose_y) == (0, 1.0, True)
    np.testing.assert_array_equal(x_next, y)


def test_line_search_one_backtrack():
    # F = x^2/2 from x=1 along d=-3 overshoots to -2; the step 0.1 d lands at 0.7
    prob, state = scalar_state(1.0, 1.0)
    d = np.array([-3.0])
    m, alpha, x_next, F_next, chose_y = line_search(prob, state, state.x + d, d)
    assert m == 1 and alpha == pytest.approx(0.1)
    np.testing.assert_allclose(x_next, [0.7])
    assert not chose_y
    assert prob.objective(state.x) - F_next >= 1e-4 * alpha * state.mu * 9.0
    assert prob.objective(np.array([-2.0])) - prob.objective(state.x) > 0


def test_line_search_tie_takes_damped_point():
    # x=3, d=-4, beta=1/2: y=-1 and x + d/2 = 1 have equal objective values
    prob, state = scalar_state(3.0, 1.0)
    d = np.array([-4.0])
    m, alpha, x_next, F_next, chose_y = line_search(prob, state, state.x + d, d, beta=0.5,
                                                    sigma_ls=0.4)
    assert m == 1 and alpha == 0.5
    assert not chose_y
    np.testing.assert_array_equal(x_next, [1.0])


def test_line_search_prefers_better_y():
    prob, state = scalar_state(1.0, 1.0)
    d = np.array([-3.0])
    y = np.array([0.01])
    m, alpha, x_next, _, chose_y = line_search(prob, state, y, d)
    assert m == 1 and chose_y
    np.testing.assert_array_equal(x_next, y)


def test_line_search_cap():
    prob, state = scalar_state(1.0, 1.0)
    d = np.array([1.0])
    with pytest.raises(SolverError):
        line_search(prob, state, state.x + d, d, max_backtracks=5)


def test_least_squares(rng):
    M = rng.standard_normal((30, 10))
    b = rng.standard_normal(30)
    prob = Problem(SmoothTerm(Quadratic(), DenseMap(M), b), zero_regularizer())
    x, rec = solve(prob, SolverConfig(eps0=1e-9))
    assert rec.status in (RESIDUAL_CONVERGED, DIRECTION_CONVERGED)
    np.testing.assert_allclose(x, np.linalg.lstsq(M, b, rcond=None)[0], atol=1e-8)
    alphas = rec.column("alpha")[:-1]
    assert np.all(alphas[-3:] == 1.0)
    r = rec.column("r")
    assert r[-1] < r[0]
    if rec.status == RESIDUAL_CONVERGED:
        assert r[-1] <= 1e-9
    else:
        assert rec.final.dnorm <= 1e-9


def test_lasso_matches_ista(rng):
    prob, A, b, lam = lasso_problem(rng)
    x, rec = solve(prob, SolverConfig(eps0=1e-8))
    assert rec.converged
    x_ref = ista(A, b, lam, iters=1_000_000)
    F_ref = prob.objective(x_ref)
    assert abs(rec.final.F - F_ref) <= 1e-8 * abs(F_ref)

    x_pg, rec_pg = pg_baseline(prob, SolverConfig(eps0=1e-8))
    assert rec_pg.converged and rec_pg.final.r <= 1e-8
    assert abs(rec_pg.final.F - rec.final.F) <= 1e-6 * abs(rec.final.F)


def test_stationary_start_returns_immediately(rng):
    M = rng.standard_normal((8, 3))
    x0 = rng.standard_normal(3)
    prob = Problem(SmoothTerm(Quadratic(), DenseMap(M), M @ x0), zero_regularizer())
    x, rec = solve(prob, SolverConfig(), x0)
    assert rec.iterations == 0 and rec.status == RESIDUAL_CONVERGED
    np.testing.assert_array_equal(x, x0)


def test_infinite_start_aborts():
    prob = Problem(SmoothTerm(Quadratic(), DenseMap(np.eye(2)), np.zeros(2)), BoxIndicator(0, 1))
    with pytest.raises(SolverError):
        solve(prob, SolverConfig(), np.array([2.0, 0.0]))
    with pytest.raises(SolverError):
        pg_baseline(prob, SolverConfig(), np.array([2.0, 0.0]))


@pytest.mark.parametrize("rho", [0.0, 0.45])
def test_robust_run_invariants(rng, rho):
    prob, x0 = robust_problem(rng)
    cfg = SolverConfig(rho=rho)
    x, rec = solve(prob, cfg, x0)
    assert rec.converged
    F = rec.column("F")
    assert np.all(np.diff(F) < 0)
    rows = rec.rows[:-1]
    for row in rows:
        assert row.slack >= 0
        assert row.theta_decrease >= 0
        expected_mu = rec.a2 * (row.r**rho if rho > 0 else 1.0)
        assert row.mu == pytest.approx(expected_mu, rel=1e-14)
        if row.dnorm > cfg.eps0:
            assert (1 - cfg.eta) * row.r <= 1.1 * (2 + row.G_norm_est) * row.dnorm
        if rho > 0:
            assert row.certificate == row.rk
            assert row.rk <= cfg.eta * min(row.r, row.r ** (1 + rho))
        else:
            assert row.certificate == row.omega_norm
            assert row.omega_norm <= cfg.eta * row.r
    assert rec.final.r <= cfg.eps0 or rec.status == DIRECTION_CONVERGED
    assert rec.final.r < rec.rows[0].r


def test_group_run(rng):
    prob, x0 = robust_problem(rng, reg=GroupL2.contiguous(0.5, 256, 8))
    x, rec = solve(prob, SolverConfig(), x0)
    assert rec.converged
    assert np.all(np.diff(rec.column("F")) < 0)


def test_pg_quadratic_and_window(rng):
    M = rng.standard_normal((20, 8))
    b = rng.standard_normal(20)
    prob = Problem(SmoothTerm(Quadratic(), DenseMap(M), b), zero_regularizer())
    x, rec = pg_baseline(prob, SolverConfig(eps0=1e-9))
    assert rec.converged
    np.testing.assert_allclose(x, np.linalg.lstsq(M, b, rcond=None)[0], atol=1e-7)
    F = rec.column("F")
    for k in range(1, F.size):
        assert F[k] <= F[max(0, k - 5):k].max() + 1e-12


def test_record_helpers(rng):
    prob, A, b, lam = lasso_problem(rng)
    _, rec = solve(prob, SolverConfig(eps0=1e-6, keep_iterates=False))
    assert rec.iterates == []
    assert len(rec.as_dicts()) == len(rec.rows) == rec.iterations + 1
    assert rec.final.time == rec.wall_time
