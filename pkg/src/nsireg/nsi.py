"""Non-sparse iteration: joint estimation of a sparse and a dense coefficient block.

The fit minimizes ``(1/2n)|y - Z beta - W gamma|^2 + lam |beta|_1`` with
``gamma`` unpenalized. Step 1 initializes ``gamma`` by the precision
plug-in ``Omega W'y / n`` and ``beta`` by a lasso with ``W gamma`` held
fixed. Step 2 cycles over every ``gamma_j`` (exact least squares on the
partial residual) and then every ``beta_k`` (soft-thresholded update)
until no coefficient moves by more than ``tol``.

All updates run on columns scaled to unit in-sample second moment and
are mapped back to the original scale on exit.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core import CoefficientEstimate, Dataset, InputError, NumericalError
from .precision import PrecisionEstimate
from .sparse_solver import LassoConfig, StandardizedDesign, _lasso_on_design, kkt_violation


@dataclass(frozen=True)
class NsiConfig:
    lam: float = 0.0
    max_outer_iter: int = 500
    tol: float = 1e-7
    standardize: bool = True
    zero_tol: float = 0.0
    max_init_sweeps: int = 1000

    def __post_init__(self):
        if not self.lam >= 0:
            raise InputError(f"lambda must be >= 0, got {self.lam}")
        if not self.tol > 0:
            raise InputError("tol must be > 0")
        if self.max_outer_iter < 1:
            raise InputError("max_outer_iter must be >= 1")

    def lasso_config(self) -> LassoConfig:
        return LassoConfig(self.lam, self.max_init_sweeps, self.tol, self.standardize)


@dataclass(frozen=True)
class FitResult:
    estimate: CoefficientEstimate
    objective_trace: np.ndarray = field(repr=False)
    gamma_stationarity: float
    beta_kkt: float
    init: CoefficientEstimate = field(repr=False, default=None)


class _JointDesign:
    """``[W, Z]`` standardized once; reused for every penalty on one dataset."""

    def __init__(self, data: Dataset, standardize: bool):
        self.data = data
        self.q = data.q
        self.design = StandardizedDesign(np.hstack([data.W, data.Z]), standardize)
        self.c, self.yy = self.design.moments(data.y)
        q = self.q
        self.z_design = _SubDesign(self.design, slice(q, None))
        self.wty = data.W.T @ data.y / data.n

    def split(self, b):
        s = self.design.scale
        return b[self.q:] / s[self.q:], b[: self.q] / s[: self.q]


class _SubDesign(StandardizedDesign):
    """Column block of a parent design sharing its scaling and Gram entries."""

    def __init__(self, parent: StandardizedDesign, cols: slice):
        self.n = parent.n
        self.scale = parent.scale[cols]
        self.Xs = parent.Xs[:, cols]
        self.G = np.ascontiguousarray(parent.G[cols, cols])


def _check_omega(data: Dataset, omega: PrecisionEstimate):
    if data.q and omega is None:
        raise InputError("a precision estimate is required when q > 0")
    if omega is not None and data.q and omega.dim != data.q:
        raise InputError(f"precision has dim {omega.dim}, expected q={data.q}")


def _init(jd: _JointDesign, omega: PrecisionEstimate, config: NsiConfig) -> CoefficientEstimate:
    q = jd.q
    if q:
        gamma0 = omega.omega_hat @ jd.wty
        g0_std = gamma0 * jd.design.scale[:q]
    else:
        gamma0 = np.zeros(0)
        g0_std = gamma0
    # Z'(y - W gamma0)/n on the standardized scale
    c_z = jd.c[q:] - jd.design.G[q:, :q] @ g0_std
    target = jd.data.y - jd.data.W @ gamma0
    yy = float(target @ target / jd.data.n)
    if q == 0:
        c_z, yy = jd.z_design.moments(jd.data.y)
    b, sweeps, status, trace = jd.z_design.solve(
        np.ascontiguousarray(c_z), yy, np.zeros(jd.data.p), 0, config.lam,
        config.max_init_sweeps, config.tol)
    if status == _kernels.NON_FINITE:
        raise NumericalError(f"non-finite objective in step 1 at sweep {sweeps}")
    return CoefficientEstimate(
        beta_hat=b / jd.z_design.scale, gamma_hat=gamma0, lam=config.lam,
        n_iterations=int(sweeps), converged=status == _kernels.CONVERGED,
        final_objective=float(trace[-1]))


def nsi_init(data: Dataset, omega: PrecisionEstimate, config: NsiConfig) -> CoefficientEstimate:
    """Step 1: ``gamma0 = Omega W'y / n``, then the lasso for ``beta`` given ``gamma0``."""
    _check_omega(data, omega)
    return _init(_JointDesign(data, config.standardize), omega, config)


def plugin_fit(data: Dataset, omega: PrecisionEstimate, lam: float,
               config: NsiConfig | None = None) -> CoefficientEstimate:
    """Non-iterative plug-in baseline: the Step 1 estimate alone."""
    config = NsiConfig(lam=lam) if config is None else _with_lam(config, lam)
    return nsi_init(data, omega, config)


def _with_lam(config: NsiConfig, lam: float) -> NsiConfig:
    from dataclasses import replace
    return replace(config, lam=float(lam))


def nsi_fit(data: Dataset, omega: PrecisionEstimate, config: NsiConfig) -> FitResult:
    """Step 1 followed by alternating full sweeps over ``gamma`` then ``beta``."""
    _check_omega(data, omega)
    return _fit(_JointDesign(data, config.standardize), omega, config)


def _fit(jd: _JointDesign, omega, config: NsiConfig) -> FitResult:
    data = jd.data
    init = _init(jd, omega, config)
    if jd.q == 0:
        # Step 2 on beta alone repeats the Step 1 sweeps, which already met tol
        est = init
        trace = np.array([init.final_objective])
    else:
        s = jd.design.scale
        b0 = np.concatenate([init.gamma_hat * s[: jd.q], init.beta_hat * s[jd.q:]])
        b, sweeps, status, trace = jd.design.solve(
            jd.c, jd.yy, b0, jd.q, config.lam, config.max_outer_iter, config.tol)
        if status == _kernels.NON_FINITE:
            raise NumericalError(f"non-finite objective at outer iteration {sweeps}")
        beta, gamma = jd.split(b)
        est = CoefficientEstimate(
            beta_hat=beta, gamma_hat=gamma, lam=config.lam, n_iterations=int(sweeps),
            converged=status == _kernels.CONVERGED, final_objective=float(trace[-1]))
    resid = data.y - data.Z @ est.beta_hat - data.W @ est.gamma_hat
    gamma_stat = float(np.max(np.abs(data.W.T @ resid)) / data.n) if data.q else 0.0
    beta_kkt = kkt_violation(data.y, data.Z, data.W @ est.gamma_hat, est.beta_hat, config.lam,
                             weights=jd.design.scale[jd.q:]) if data.p else 0.0
    return FitResult(estimate=est, objective_trace=np.asarray(trace), gamma_stationarity=gamma_stat,
                     beta_kkt=beta_kkt, init=init)


def oracle_fit(data: Dataset, true_gamma, omega: PrecisionEstimate, lam: float,
               config: NsiConfig | None = None) -> CoefficientEstimate:
    """Reference estimator built from the true dense coefficients.

    ``beta`` is the lasso with ``W gamma`` (true gamma) as a fixed offset;
    ``gamma`` is then ``Omega W'(y - Z beta) / n``.
    """
    config = NsiConfig(lam=lam) if config is None else _with_lam(config, lam)
    true_gamma = np.asarray(true_gamma, dtype=float)
    if true_gamma.shape != (data.q,):
        raise InputError(f"true_gamma must have length q={data.q}")
    _check_omega(data, omega)
    jd = _JointDesign(data, config.standardize)
    target = data.y - data.W @ true_gamma
    beta_est = _lasso_on_design(jd.z_design, target, config.lasso_config())
    beta = beta_est.beta_hat
    if data.q:
        gamma = omega.omega_hat @ (data.W.T @ (data.y - data.Z @ beta)) / data.n
    else:
        gamma = np.zeros(0)
    return CoefficientEstimate(beta_hat=beta, gamma_hat=gamma, lam=lam,
                               n_iterations=beta_est.n_iterations, converged=beta_est.converged,
                               final_objective=beta_est.final_objective)


def global_objective(data: Dataset, beta, gamma, lam: float, standardize: bool = True) -> float:
    """``(1/2n)|y - Z beta - W gamma|^2 + lam * sum_k s_k |beta_k|`` in original units.

    ``s_k`` is the column scale of ``Z_k`` (all ones without
    standardization), which matches the objective the solver reports.
    """
    from .sparse_solver import column_scales
    r = data.y - data.Z @ beta - data.W @ gamma
    s = column_scales(data.Z, standardize)
    return float(r @ r / (2 * data.n) + lam * np.sum(s * np.abs(beta)))
