"""Shared data containers and the evaluation metrics.

All metrics act on the concatenated coefficient vector ``(beta, gamma)``:
the sparse block first, the dense block second.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


class InputError(ValueError):
    """Raised when arguments violate a documented precondition."""


class UndefinedMetricError(ValueError):
    """Raised when a rate has an empty denominator."""


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a matrix that must be positive definite is not."""


class NumericalError(ArithmeticError):
    """Raised when an iterative solver produces non-finite values."""


def _as_vector(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise InputError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


def _as_matrix(x, name: str, n_rows: int) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(n_rows, 0)
    if arr.ndim != 2:
        raise InputError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if arr.shape[0] != n_rows:
        raise InputError(f"{name} has {arr.shape[0]} rows, expected {n_rows}")
    return arr


@dataclass(frozen=True)
class Dataset:
    """Response ``y`` with a sparse-block design ``Z`` and a dense-block design ``W``."""

    y: np.ndarray
    Z: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        y = _as_vector(self.y, "y")
        n = y.shape[0]
        if n < 1:
            raise InputError("dataset needs at least one row")
        Z = _as_matrix(self.Z, "Z", n)
        W = _as_matrix(self.W, "W", n)
        if Z.shape[1] + W.shape[1] < 1:
            raise InputError("dataset needs at least one predictor column")
        for name, arr in (("y", y), ("Z", Z), ("W", W)):
            if not np.all(np.isfinite(arr)):
                raise InputError(f"{name} contains non-finite entries")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "W", W)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.Z.shape[1]

    @property
    def q(self) -> int:
        return self.W.shape[1]

    def subset(self, rows) -> "Dataset":
        return Dataset(self.y[rows], self.Z[rows], self.W[rows])

    def predict(self, beta, gamma) -> np.ndarray:
        return self.Z @ beta + self.W @ gamma


@dataclass(frozen=True)
class TrueModel:
    beta: np.ndarray
    gamma: np.ndarray
    sigma: float = 1.0
    Omega: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "beta", _as_vector(self.beta, "beta"))
        object.__setattr__(self, "gamma", _as_vector(self.gamma, "gamma"))
        if not self.sigma >= 0:
            raise InputError("sigma must be non-negative")
        if self.Omega is not None:
            om = np.asarray(self.Omega, dtype=float)
            q = self.gamma.shape[0]
            if om.shape != (q, q):
                raise InputError(f"Omega must be {q}x{q}, got {om.shape}")
            if not np.allclose(om, om.T, rtol=0, atol=1e-10 * max(1.0, np.abs(om).max(initial=0))):
                raise InputError("Omega must be symmetric")
            if q and np.linalg.eigvalsh(om).min() <= 0:
                raise NotPositiveDefiniteError("Omega must be positive definite")
            object.__setattr__(self, "Omega", om)

    @property
    def coefficients(self) -> np.ndarray:
        return np.concatenate([self.beta, self.gamma])


@dataclass(frozen=True)
class CoefficientEstimate:
    beta_hat: np.ndarray
    gamma_hat: np.ndarray
    lam: float = 0.0
    n_iterations: int = 0
    converged: bool = True
    final_objective: float = float("nan")

    def __post_init__(self):
        object.__setattr__(self, "beta_hat", _as_vector(self.beta_hat, "beta_hat"))
        object.__setattr__(self, "gamma_hat", _as_vector(self.gamma_hat, "gamma_hat"))

    @property
    def coefficients(self) -> np.ndarray:
        return np.concatenate([self.beta_hat, self.gamma_hat])


@dataclass(frozen=True)
class MetricsReport:
    l1: float
    l2: float
    fpr: Optional[float]
    tpr: Optional[float]
    nz: int
    mse: Optional[float] = None

    def as_dict(self) -> dict:
        return {"l1": self.l1, "l2": self.l2, "fpr": self.fpr, "tpr": self.tpr,
                "nz": self.nz, "mse": self.mse}


def _paired(est: CoefficientEstimate, truth: TrueModel):
    if est.beta_hat.shape != truth.beta.shape or est.gamma_hat.shape != truth.gamma.shape:
        raise InputError(
            f"estimate dims (p={est.beta_hat.size}, q={est.gamma_hat.size}) do not match "
            f"truth dims (p={truth.beta.size}, q={truth.gamma.size})")
    return est.coefficients, truth.coefficients


def l1_error(est: CoefficientEstimate, truth: TrueModel) -> float:
    """``|beta - beta_hat|_1 + |gamma - gamma_hat|_1``."""
    e, t = _paired(est, truth)
    return float(np.abs(e - t).sum())


def l2_error(est: CoefficientEstimate, truth: TrueModel) -> float:
    """Euclidean norm of the stacked error vector."""
    e, t = _paired(est, truth)
    return float(np.sqrt(np.sum((e - t) ** 2)))


def fpr(est: CoefficientEstimate, truth: TrueModel, zero_tol: float = 0.0) -> float:
    e, t = _paired(est, truth)
    null = t == 0
    if not null.any():
        raise UndefinedMetricError("false positive rate undefined: truth has no zero coefficients")
    return float(np.count_nonzero(np.abs(e[null]) > zero_tol) / np.count_nonzero(null))


def tpr(est: CoefficientEstimate, truth: TrueModel, zero_tol: float = 0.0) -> float:
    e, t = _paired(est, truth)
    signal = t != 0
    if not signal.any():
        raise UndefinedMetricError("true positive rate undefined: truth has no nonzero coefficients")
    return float(np.count_nonzero(np.abs(e[signal]) > zero_tol) / np.count_nonzero(signal))


def nz(est: CoefficientEstimate, zero_tol: float = 0.0) -> int:
    return int(np.count_nonzero(np.abs(est.coefficients) > zero_tol))


def mse(predicted, actual) -> float:
    a = _as_vector(predicted, "predicted")
    b = _as_vector(actual, "actual")
    if a.shape != b.shape:
        raise InputError(f"length mismatch: {a.size} vs {b.size}")
    if a.size == 0:
        raise InputError("mse of empty vectors")
    return float(np.mean((a - b) ** 2))


def evaluate(est: CoefficientEstimate, truth: TrueModel, zero_tol: float = 0.0,
             predicted=None, actual=None) -> MetricsReport:
    """Compute every metric; undefined rates come back as ``None``."""
    try:
        f = fpr(est, truth, zero_tol)
    except UndefinedMetricError:
        f = None
    try:
        t = tpr(est, truth, zero_tol)
    except UndefinedMetricError:
        t = None
    m = mse(predicted, actual) if predicted is not None else None
    return MetricsReport(l1=l1_error(est, truth), l2=l2_error(est, truth), fpr=f, tpr=t,
                         nz=nz(est, zero_tol), mse=m)
