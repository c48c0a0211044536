"""Estimators of the dense-block precision matrix."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .core import InputError, NotPositiveDefiniteError
from .linalg import as_symmetric, cholesky, spd_inverse

log = logging.getLogger(__name__)

METHODS = ("known", "identity", "ridge_inverse", "graphical_lasso")


@dataclass(frozen=True)
class PrecisionEstimate:
    omega_hat: np.ndarray
    method: str
    lambda_star: Optional[float] = None
    converged: bool = True
    n_iterations: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise InputError(f"unknown precision method {self.method!r}")
        om = as_symmetric(self.omega_hat)
        cholesky(om)  # PD certificate
        object.__setattr__(self, "omega_hat", om)

    @property
    def dim(self) -> int:
        return self.omega_hat.shape[0]


def known_precision(omega) -> PrecisionEstimate:
    return PrecisionEstimate(np.asarray(omega, dtype=float), "known")


def identity_precision(q: int) -> PrecisionEstimate:
    if q < 1:
        raise InputError("q must be >= 1")
    return PrecisionEstimate(np.eye(q), "identity")


def ridge_inverse_precision(S, eps: float) -> PrecisionEstimate:
    """``(S + eps I)^{-1}``, invertible for any PSD ``S``."""
    if not eps > 0:
        raise InputError("eps must be > 0")
    S = as_symmetric(S)
    return PrecisionEstimate(spd_inverse(S + eps * np.eye(S.shape[0])), "ridge_inverse")


def glasso_kkt_residual(S, omega, lam: float) -> float:
    """Largest violation of the graphical-lasso optimality conditions.

    With ``D = inv(omega) - S``: diagonal entries must vanish, off-diagonal
    entries must satisfy ``|D| <= lam`` where omega is zero and
    ``D = lam * sign(omega)`` where it is not.
    """
    S = np.asarray(S, dtype=float)
    D = spd_inverse(omega) - S
    off = ~np.eye(S.shape[0], dtype=bool)
    nonzero = (omega != 0) & off
    zero = (omega == 0) & off
    parts = [np.abs(np.diag(D))]
    if zero.any():
        parts.append(np.maximum(np.abs(D[zero]) - lam, 0.0))
    if nonzero.any():
        parts.append(np.abs(D[nonzero] - lam * np.sign(omega[nonzero])))
    return float(max(p.max() for p in parts))


def graphical_lasso(S, lam: float, max_iter: int = 200, tol: float = 1e-8) -> PrecisionEstimate:
    """Block coordinate descent for the graphical lasso, off-diagonal penalty only.

    Maximizes ``log det(Omega) - tr(S Omega) - lam * sum_{j != k} |Omega_jk|``.
    Each column update solves a lasso in the current covariance estimate,
    as in Friedman, Hastie and Tibshirani (2008). Iteration stops once the
    KKT residual of the symmetrized precision is at most ``tol``; if
    ``max_iter`` passes are used first, the last iterate is returned with
    ``converged=False``.
    """
    S = as_symmetric(S)
    if not lam >= 0:
        raise InputError("lambda must be >= 0")
    if np.any(np.diag(S) <= 0):
        raise InputError("S must have a strictly positive diagonal")
    q = S.shape[0]
    if q == 1:
        return PrecisionEstimate(np.array([[1.0 / S[0, 0]]]), "graphical_lasso", lam)

    Wc = S.copy()
    B = np.zeros((q, q - 1))
    omega = np.diag(1.0 / np.diag(S))
    converged = False
    inner_tol = tol * 1e-2
    it = 0
    for it in range(1, max_iter + 1):
        for j in range(q):
            idx = np.r_[0:j, j + 1:q]
            A = np.ascontiguousarray(Wc[np.ix_(idx, idx)])
            b = B[j].copy()
            _kernels.quadratic_lasso(A, np.ascontiguousarray(S[idx, j]), b, float(lam),
                                     10000, inner_tol)
            B[j] = b
            w12 = A @ b
            Wc[idx, j] = w12
            Wc[j, idx] = w12
        omega = _precision_from_columns(Wc, B)
        try:
            resid = glasso_kkt_residual(S, omega, lam)
        except NotPositiveDefiniteError:
            continue
        log.debug("glasso pass %d: kkt residual %.3e", it, resid)
        if resid <= tol:
            converged = True
            break
    if not converged:
        log.warning("graphical lasso stopped after %d passes without meeting tol=%g", it, tol)
    return PrecisionEstimate(omega, "graphical_lasso", lam, converged=converged, n_iterations=it)


def _precision_from_columns(Wc, B):
    q = Wc.shape[0]
    omega = np.zeros((q, q))
    for j in range(q):
        idx = np.r_[0:j, j + 1:q]
        theta_jj = 1.0 / (Wc[j, j] - Wc[idx, j] @ B[j])
        omega[j, j] = theta_jj
        omega[idx, j] = -B[j] * theta_jj
    # keep the smaller-magnitude entry so a zero in either column survives
    upper = np.triu_indices(q, 1)
    a, b = omega[upper], omega.T[upper]
    sym = np.where(np.abs(a) <= np.abs(b), a, b)
    sym[(a == 0) | (b == 0)] = 0.0
    omega[upper] = sym
    omega.T[upper] = sym
    return omega


def glasso_lambda_rule(n: float, dim: int, M: float = 1.0, alpha: float = 1.0, tau: float = 2.0,
                       parse: str = "power_of_log") -> float:
    """Tuning rule ``4 (M / alpha) sqrt(log(n * dim)^tau / n)``.

    ``parse="log_of_power"`` reads the exponent inside the logarithm
    instead, giving ``4 (M / alpha) sqrt(tau * log(n * dim) / n)``.
    """
    if not M > 0:
        raise InputError("M must be > 0")
    if not 0 < alpha <= 1:
        raise InputError("alpha must lie in (0, 1]")
    if not tau > 1:
        raise InputError("tau must be > 1")
    if n < 2 or dim < 1 or n * dim < 2:
        raise InputError("need n >= 2, dim >= 1, n * dim >= 2")
    logterm = math.log(n * dim)
    if parse == "power_of_log":
        inner = logterm ** tau / n
    elif parse == "log_of_power":
        inner = tau * logterm / n
    else:
        raise InputError(f"unknown parse {parse!r}")
    return 4.0 * (M / alpha) * math.sqrt(inner)


def estimate_precision(W, method: str = "graphical_lasso", *, M: float = 1.0, alpha: float = 1.0,
                       tau: float = 2.0, ridge_eps: float = 1e-3, center: bool = False,
                       max_iter: int = 200, tol: float = 1e-8) -> PrecisionEstimate:
    """Estimate the precision of the rows of ``W``.

    ``graphical_lasso`` uses the tuning rule above and falls back to the
    ridge inverse when it cannot certify a positive-definite result.
    """
    from .linalg import sample_covariance

    W = np.asarray(W, dtype=float)
    q = W.shape[1]
    if method == "identity":
        return identity_precision(q)
    S = sample_covariance(W, center=center)
    if method == "ridge_inverse":
        return ridge_inverse_precision(S, ridge_eps)
    if method != "graphical_lasso":
        raise InputError(f"cannot estimate precision with method {method!r}")
    lam = glasso_lambda_rule(W.shape[0], q, M, alpha, tau)
    try:
        if np.any(np.diag(S) <= 0):
            raise InputError("constant column in W")
        return graphical_lasso(S, lam, max_iter=max_iter, tol=tol)
    except (NotPositiveDefiniteError, InputError) as exc:
        log.warning("graphical lasso failed (%s); using ridge inverse", exc)
        return ridge_inverse_precision(S, ridge_eps)
