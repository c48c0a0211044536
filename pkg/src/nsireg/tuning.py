"""K-fold cross-validation over a penalty grid."""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .core import CoefficientEstimate, Dataset, InputError
from .linalg import make_rng
from .nsi import NsiConfig, _fit, _init, _JointDesign
from .precision import PrecisionEstimate
from .sparse_solver import StandardizedDesign, _lasso_on_design

log = logging.getLogger(__name__)


class CvError(RuntimeError):
    def __init__(self, lam, fold, cause):
        super().__init__(f"fit failed at lambda={lam!r}, fold={fold}: {cause}")
        self.lam = lam
        self.fold = fold


@dataclass(frozen=True)
class CvResult:
    lambda_grid: np.ndarray
    cv_error: np.ndarray
    best_lambda: float
    fold_assignment: np.ndarray

    @property
    def best_index(self) -> int:
        return int(np.flatnonzero(self.lambda_grid == self.best_lambda)[0])


def kfold_split(n: int, k: int, seed: int = 0) -> np.ndarray:
    """Fold label for each row; fold sizes differ by at most one."""
    if not 2 <= k <= n:
        raise InputError(f"need 2 <= k <= n, got k={k}, n={n}")
    folds = np.empty(n, dtype=np.int64)
    folds[make_rng(seed).permutation(n)] = np.arange(n) % k
    return folds


def default_grid(data: Dataset, size: int = 50, min_ratio: float = 1e-3,
                 standardize: bool = True) -> np.ndarray:
    """Log-spaced grid from ``lambda_max`` of the joint design down to ``min_ratio`` of it."""
    from .sparse_solver import column_scales

    X = np.hstack([data.Z, data.W])
    Xs = X / column_scales(X, standardize)
    lmax = float(np.max(np.abs(Xs.T @ data.y)) / data.n)
    if lmax == 0:
        lmax = 1.0
    return lmax * np.logspace(0, np.log10(min_ratio), size)


class Fitter:
    """A fitting procedure that can reuse one standardized design across a grid."""

    name = "fitter"

    def __init__(self, config: NsiConfig | None = None):
        self.config = config or NsiConfig()

    def __call__(self, data: Dataset, omega: PrecisionEstimate, lam: float) -> CoefficientEstimate:
        return self.path(data, omega, [lam])[0]

    def path(self, data, omega, grid):
        raise NotImplementedError


class NsiFitter(Fitter):
    name = "nsi"

    def path(self, data, omega, grid):
        jd = _JointDesign(data, self.config.standardize)
        return [_fit(jd, omega, replace(self.config, lam=float(lam))).estimate for lam in grid]


class PluginFitter(Fitter):
    name = "plugin"

    def path(self, data, omega, grid):
        jd = _JointDesign(data, self.config.standardize)
        return [_init(jd, omega, replace(self.config, lam=float(lam))) for lam in grid]


class LassoFitter(Fitter):
    """Plain lasso on the joint design ``[Z, W]``, penalizing every coefficient."""

    name = "lasso"

    def path(self, data, omega, grid):
        design = StandardizedDesign(np.hstack([data.Z, data.W]), self.config.standardize)
        out = []
        for lam in grid:
            cfg = replace(self.config, lam=float(lam)).lasso_config()
            est = _lasso_on_design(design, data.y, cfg)
            b = est.beta_hat
            out.append(replace(est, beta_hat=b[: data.p], gamma_hat=b[data.p:]))
        return out


FITTERS = {"nsi": NsiFitter, "plugin": PluginFitter, "lasso": LassoFitter}


def make_fitter(method, config: NsiConfig | None = None) -> Fitter:
    if isinstance(method, Fitter):
        return method
    if callable(method):
        return method
    try:
        return FITTERS[method](config)
    except KeyError:
        raise InputError(f"unknown method {method!r}; choose from {sorted(FITTERS)}") from None


def cv_lambda(data: Dataset, omega: PrecisionEstimate, grid=None, k: int = 10, seed: int = 0,
              fitter="nsi", config: NsiConfig | None = None) -> CvResult:
    """Pick the penalty with the smallest mean held-out prediction MSE.

    The precision estimate is shared by all folds. Ties go to the smaller
    penalty, then to the first occurrence in the grid.
    """
    if grid is None:
        grid = default_grid(data)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise InputError("grid must be a non-empty vector of finite values >= 0")
    order = np.argsort(-grid, kind="stable")
    grid = grid[order]
    fit = make_fitter(fitter, config)
    folds = kfold_split(data.n, k, seed)
    errors = np.zeros((k, grid.size))
    for f in range(k):
        train, test = data.subset(folds != f), data.subset(folds == f)
        try:
            if isinstance(fit, Fitter):
                ests = fit.path(train, omega, grid)
            else:
                ests = [fit(train, omega, lam) for lam in grid]
        except Exception as exc:  # pinpoint the failing lambda
            lam = _locate_failure(fit, train, omega, grid)
            raise CvError(lam, f, exc) from exc
        for i, est in enumerate(ests):
            pred = test.predict(est.beta_hat, est.gamma_hat)
            errors[f, i] = np.mean((test.y - pred) ** 2)
    cv_error = errors.mean(axis=0)
    best = _argmin_smallest_lambda(grid, cv_error)
    log.debug("cv picked lambda=%.4g (index %d)", grid[best], best)
    return CvResult(grid, cv_error, float(grid[best]), folds)


def _argmin_smallest_lambda(grid, err) -> int:
    err = np.where(np.isfinite(err), err, np.inf)
    ties = np.flatnonzero(err == err.min())
    smallest = grid[ties].min()
    return int(ties[grid[ties] == smallest][0])


def _locate_failure(fit, train, omega, grid):
    for lam in grid:
        try:
            fit(train, omega, lam)
        except Exception:
            return float(lam)
    return None
