import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nsireg.core import InputError
from nsireg.sparse_solver import (LassoConfig, StandardizedDesign, column_scales, kkt_violation,
                                  lambda_max, lasso_cd, lasso_objective, soft_threshold)

from oracles import brute_force_lasso, orthogonal_design, rms_scales, small_lasso_fixtures


@pytest.mark.parametrize("a,t,expected", [(5, 2, 3), (-5, 2, -3), (1.5, 2, 0), (2, 2, 0), (0, 0, 0)])
def test_soft_threshold_branches(a, t, expected):
    assert soft_threshold(a, t) == expected


def test_soft_threshold_negative_threshold():
    with pytest.raises(InputError):
        soft_threshold(1.0, -0.1)


def test_soft_threshold_grid():
    """Shrinkage and sign preservation over a sign x magnitude grid."""
    mags = [0.0, 1e-12, 0.3, 1.0, 2.5, 1e6]
    for sign, a_mag, t in itertools.product((-1, 1), mags, mags):
        a = sign * a_mag
        s = soft_threshold(a, t)
        assert abs(s) <= abs(a)
        assert s == 0 or np.sign(s) == np.sign(a)
        assert s == pytest.approx(np.sign(a) * max(abs(a) - t, 0.0), abs=0)


@settings(max_examples=300, deadline=None)
@given(st.floats(-1e6, 1e6), st.floats(0, 1e6))
def test_soft_threshold_properties(a, t):
    s = soft_threshold(a, t)
    assert abs(s) <= abs(a)
    assert s == 0 or np.sign(s) == np.sign(a)
    if abs(a) > t:
        assert s == pytest.approx(a - np.sign(a) * t, rel=1e-12, abs=1e-9)
    else:
        assert s == 0


def test_config_validation():
    with pytest.raises(InputError):
        LassoConfig(lam=-1)
    with pytest.raises(InputError):
        LassoConfig(tol=0)


def assert_monotone(trace):
    trace = np.asarray(trace)
    assert np.all(np.diff(trace) <= 1e-12 * (1 + np.abs(trace[:-1])))


def _fit_trace(y, X, offset, cfg):
    design = StandardizedDesign(X, cfg.standardize)
    c, yy = design.moments(y - offset)
    return design.solve(c, yy, np.zeros(X.shape[1]), 0, cfg.lam, cfg.max_sweeps, cfg.tol)[3]


def test_orthonormal_least_squares():
    X = orthogonal_design(20, 4, seed=1)
    y = np.random.default_rng(2).normal(size=20)
    est = lasso_cd(y, X, None, LassoConfig(lam=0.0))
    np.testing.assert_allclose(est.beta_hat, X.T @ y / 20, atol=1e-7)
    assert est.converged


def test_lambda_max_deactivates():
    rng = np.random.default_rng(0)
    X, y = rng.normal(size=(15, 5)), rng.normal(size=15)
    off = rng.normal(size=15)
    lmax = lambda_max(y, X, off)
    est = lasso_cd(y, X, off, LassoConfig(lam=lmax))
    assert np.all(est.beta_hat == 0)
    assert est.n_iterations == 1
    assert kkt_violation(y, X, off, np.zeros(5), lmax, weights=column_scales(X)) == pytest.approx(0, abs=1e-15)
    est = lasso_cd(y, X, off, LassoConfig(lam=0.99 * lmax))
    assert np.count_nonzero(est.beta_hat) == 1


def test_kkt_closed_form_orthogonal():
    X = orthogonal_design(10, 2, seed=4)
    y = X @ np.array([1.0, -0.2]) + 0.01 * np.random.default_rng(5).normal(size=10)
    lam = 0.5
    z = X.T @ y / 10
    beta = np.sign(z) * np.maximum(np.abs(z) - lam, 0)  # orthogonal-design lasso
    assert kkt_violation(y, X, None, beta, lam) <= 1e-10
    assert kkt_violation(y, X, None, beta + 0.1, lam) > 0.05


@pytest.mark.parametrize("fixture", range(10))
@pytest.mark.parametrize("lam_frac", [0.0, 0.05, 0.3, 0.7, 1.2])
def test_matches_brute_force(fixture, lam_frac):
    X, y, offset = small_lasso_fixtures()[fixture]
    lam = lam_frac * lambda_max(y, X, offset)
    est = lasso_cd(y, X, offset, LassoConfig(lam=lam))
    oracle = brute_force_lasso(y, X, lam, weights=rms_scales(X), offset=offset)
    assert np.max(np.abs(est.beta_hat - oracle)) <= 1e-5
    assert est.converged
    off = np.zeros_like(y) if offset is None else offset
    assert kkt_violation(y, X, off, est.beta_hat, lam, weights=column_scales(X)) <= 10 * 1e-7
    assert_monotone(_fit_trace(y, X, off, LassoConfig(lam=lam)))


def test_n6_p3_lambda_half():
    rng = np.random.default_rng(42)
    X, y = rng.normal(size=(6, 3)), rng.normal(size=6) * 2
    est = lasso_cd(y, X, None, LassoConfig(lam=0.5))
    oracle = brute_force_lasso(y, X, 0.5, weights=rms_scales(X))
    assert np.max(np.abs(est.beta_hat - oracle)) <= 1e-5


def test_objective_reported_on_standardized_scale():
    rng = np.random.default_rng(1)
    X, y = rng.normal(size=(30, 6)) * 3, rng.normal(size=30)
    est = lasso_cd(y, X, None, LassoConfig(lam=0.1))
    ref = lasso_objective(y, X, None, est.beta_hat, 0.1, weights=column_scales(X))
    assert est.final_objective == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("c", [0.25, 2.0, 8.0])
def test_scaling_consistency(c):
    rng = np.random.default_rng(3)
    X, y = rng.normal(size=(25, 8)), rng.normal(size=25)
    a = lasso_cd(y, X, None, LassoConfig(lam=0.05))
    b = lasso_cd(y, X * c, None, LassoConfig(lam=0.05))
    assert np.array_equal(b.beta_hat, a.beta_hat / c)


def test_monotone_on_larger_problem():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(40, 60))
    y = X[:, :5] @ np.full(5, 2.0) + rng.normal(size=40)
    for lam in (0.01, 0.1, 0.5):
        trace = _fit_trace(y, X, np.zeros(40), LassoConfig(lam=lam))
        assert_monotone(trace)


def test_max_sweeps_flag():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(20, 30))
    X[:, 1] = X[:, 0] + 1e-3 * rng.normal(size=20)
    y = rng.normal(size=20)
    est = lasso_cd(y, X, None, LassoConfig(lam=1e-4, max_sweeps=3))
    assert not est.converged and est.n_iterations == 3


def test_rejects_non_finite():
    X = np.ones((3, 2))
    with pytest.raises(InputError):
        lasso_cd(np.array([1.0, np.inf, 0.0]), X)
    with pytest.raises(InputError):
        lasso_cd(np.ones(3), np.ones((4, 2)))


def test_no_standardize_is_plain_lasso():
    rng = np.random.default_rng(2)
    X, y = rng.normal(size=(7, 3)) * [1, 3, 0.5], rng.normal(size=7)
    est = lasso_cd(y, X, None, LassoConfig(lam=0.2, standardize=False, tol=1e-10))
    oracle = brute_force_lasso(y, X, 0.2)
    assert np.max(np.abs(est.beta_hat - oracle)) <= 1e-6
