"""Soft-thresholding and cyclic coordinate descent for the lasso."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import CoefficientEstimate, InputError, NumericalError


def soft_threshold(alpha, threshold):
    """``sign(alpha) * max(|alpha| - threshold, 0)``; works elementwise on arrays."""
    if np.any(np.asarray(threshold) < 0):
        raise InputError("threshold must be non-negative")
    out = np.sign(alpha) * np.maximum(np.abs(alpha) - threshold, 0.0)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class LassoConfig:
    lam: float = 0.0
    max_sweeps: int = 1000
    tol: float = 1e-7
    standardize: bool = True

    def __post_init__(self):
        if not self.lam >= 0:
            raise InputError(f"lambda must be >= 0, got {self.lam}")
        if not self.tol > 0:
            raise InputError(f"tol must be > 0, got {self.tol}")
        if self.max_sweeps < 1:
            raise InputError("max_sweeps must be >= 1")


def column_scales(X, standardize: bool = True) -> np.ndarray:
    """Root mean square of each column (1 for all-zero columns or when disabled)."""
    X = np.asarray(X, dtype=float)
    if not standardize:
        return np.ones(X.shape[1])
    s = np.sqrt(np.mean(X ** 2, axis=0)) if X.shape[0] else np.ones(X.shape[1])
    s[s == 0] = 1.0
    return s


class StandardizedDesign:
    """Column-scaled design with its Gram matrix, shared across many fits."""

    def __init__(self, X, standardize: bool = True):
        X = np.asarray(X, dtype=float)
        self.n = X.shape[0]
        self.scale = column_scales(X, standardize)
        self.Xs = X / self.scale
        G = self.Xs.T @ self.Xs / self.n
        self.G = np.ascontiguousarray((G + G.T) / 2)

    def moments(self, target):
        c = self.Xs.T @ target / self.n
        return np.ascontiguousarray(c), float(target @ target / self.n)

    def solve(self, c, yy, b0, n_free, lam, max_sweeps, tol):
        """Run the compiled loop from ``b0`` (standardized units).

        Returns ``(b, n_sweeps, status, trace)``.
        """
        b = np.array(b0, dtype=float)
        trace = np.empty(max_sweeps + 1)
        sweeps, status = _kernels.coordinate_descent(
            self.G, c, yy, b, n_free, float(lam), int(max_sweeps), float(tol), trace)
        return b, sweeps, status, trace[: sweeps + 1]


def _check_finite(**arrays):
    for name, arr in arrays.items():
        if not np.all(np.isfinite(arr)):
            raise InputError(f"{name} contains non-finite entries")


def _prepare(y, X, offset):
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1 and X.size == 0:
        X = X.reshape(y.shape[0], 0)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise InputError(f"X must have {y.shape[0]} rows, got shape {X.shape}")
    if offset is None or np.size(offset) == 0:
        offset = np.zeros_like(y)
    offset = np.asarray(offset, dtype=float)
    if offset.shape != y.shape:
        raise InputError("offset must have the same length as y")
    _check_finite(y=y, X=X, offset=offset)
    return y, X, offset


def lasso_cd(y, X, offset=None, config: LassoConfig = LassoConfig()) -> CoefficientEstimate:
    """Minimize ``(1/2n)|y - offset - X b|^2 + lam |b|_1`` by cyclic coordinate descent.

    With ``config.standardize`` the penalty acts on coefficients of the
    unit-second-moment columns; the returned ``beta_hat`` is on the
    original column scale. The objective reported is on the standardized
    scale.
    """
    y, X, offset = _prepare(y, X, offset)
    design = StandardizedDesign(X, config.standardize)
    return _lasso_on_design(design, y - offset, config)


def _lasso_on_design(design: StandardizedDesign, target, config: LassoConfig):
    c, yy = design.moments(target)
    b, sweeps, status, trace = design.solve(
        c, yy, np.zeros(design.G.shape[0]), 0, config.lam, config.max_sweeps, config.tol)
    if status == _kernels.NON_FINITE:
        raise NumericalError(f"non-finite objective at sweep {sweeps}")
    return CoefficientEstimate(
        beta_hat=b / design.scale, gamma_hat=np.zeros(0), lam=config.lam,
        n_iterations=int(sweeps), converged=status == _kernels.CONVERGED,
        final_objective=float(trace[-1]))


def lambda_max(y, X, offset=None, standardize: bool = True) -> float:
    """Smallest penalty at which the all-zero vector solves the lasso."""
    y, X, offset = _prepare(y, X, offset)
    if X.shape[1] == 0:
        return 0.0
    Xs = X / column_scales(X, standardize)
    return float(np.max(np.abs(Xs.T @ (y - offset))) / y.shape[0])


def kkt_violation(y, X, offset, beta, lam, weights=None) -> float:
    """Largest violation of the lasso subgradient conditions.

    ``weights`` scales the penalty per coordinate. A fit made with
    ``standardize=True`` is certified with ``weights=column_scales(X)``.
    """
    y, X, offset = _prepare(y, X, offset)
    beta = np.asarray(beta, dtype=float)
    if X.shape[1] == 0:
        return 0.0
    w = np.ones(X.shape[1]) if weights is None else np.asarray(weights, dtype=float)
    g = X.T @ (y - offset - X @ beta) / y.shape[0]
    active = beta != 0
    viol = np.where(active, np.abs(g - lam * w * np.sign(beta)),
                    np.maximum(np.abs(g) - lam * w, 0.0))
    return float(viol.max())


def lasso_objective(y, X, offset, beta, lam, weights=None) -> float:
    y, X, offset = _prepare(y, X, offset)
    beta = np.asarray(beta, dtype=float)
    w = np.ones(X.shape[1]) if weights is None else np.asarray(weights, dtype=float)
    r = y - offset - X @ beta
    return float(r @ r / (2 * y.shape[0]) + lam * np.sum(w * np.abs(beta)))
