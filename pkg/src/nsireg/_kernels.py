"""Compiled coordinate-descent loops.

Everything here works on a Gram matrix ``G = X^T X / n`` and the moment
vector ``c = X^T y / n`` so a sweep costs O(d) per moved coordinate.
"""
import numpy as np
from numba import njit

# status codes returned by the loops
CONVERGED = 0
MAX_ITER = 1
NON_FINITE = 2


@njit(cache=True)
def coordinate_descent(G, c, yy, b, n_free, lam, max_sweeps, tol, trace):
    """Cyclic coordinate descent for ``0.5 * r'r/n + lam * |b[n_free:]|_1``.

    Coordinates ``0..n_free-1`` are unpenalized and visited first in every
    sweep; the rest are soft-thresholded. ``b`` is updated in place.
    ``trace[0]`` gets the starting objective and ``trace[t]`` the objective
    after sweep ``t``.

    ``G`` must be symmetric; rows are read in place of columns.

    Returns ``(n_sweeps, status)``.
    """
    d = G.shape[0]
    grad = c - G @ b
    trace[0] = _objective(b, c, grad, yy, n_free, lam)
    status = MAX_ITER
    sweeps = 0
    for sweep in range(1, max_sweeps + 1):
        sweeps = sweep
        dmax = 0.0
        for j in range(d):
            gjj = G[j, j]
            if gjj <= 0.0:
                continue
            rho = grad[j] + gjj * b[j]
            if j < n_free:
                new = rho / gjj
            else:
                a = abs(rho) - lam
                if a > 0.0:
                    new = (a if rho > 0.0 else -a) / gjj
                else:
                    new = 0.0
            delta = new - b[j]
            if delta != 0.0:
                b[j] = new
                for k in range(d):
                    grad[k] -= delta * G[j, k]
                if abs(delta) > dmax:
                    dmax = abs(delta)
        obj = _objective(b, c, grad, yy, n_free, lam)
        trace[sweep] = obj
        if not np.isfinite(obj):
            status = NON_FINITE
            break
        if dmax < tol:
            status = CONVERGED
            break
    return sweeps, status


@njit(cache=True)
def _objective(b, c, grad, yy, n_free, lam):
    # r'r/n = y'y/n - b'c - b'grad, since grad = c - G b
    fit = 0.0
    pen = 0.0
    for j in range(b.shape[0]):
        fit += b[j] * (c[j] + grad[j])
        if j >= n_free:
            pen += abs(b[j])
    return 0.5 * (yy - fit) + lam * pen


@njit(cache=True)
def quadratic_lasso(A, s, b, lam, max_sweeps, tol):
    """Minimize ``0.5 b'Ab - s'b + lam |b|_1`` in place; returns sweeps used."""
    d = A.shape[0]
    grad = s - A @ b
    sweeps = 0
    for sweep in range(1, max_sweeps + 1):
        sweeps = sweep
        dmax = 0.0
        for j in range(d):
            ajj = A[j, j]
            rho = grad[j] + ajj * b[j]
            a = abs(rho) - lam
            if a > 0.0:
                new = (a if rho > 0.0 else -a) / ajj
            else:
                new = 0.0
            delta = new - b[j]
            if delta != 0.0:
                b[j] = new
                for k in range(d):
                    grad[k] -= delta * A[j, k]
                if abs(delta) > dmax:
                    dmax = abs(delta)
        if dmax < tol:
            break
    return sweeps
